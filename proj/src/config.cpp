#include "eadlab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "eadlab/error.hpp"

namespace eadlab {

using json = nlohmann::json;

namespace {

std::string child(const std::string& ptr, const std::string& key) {
  std::string esc;
  for (char c : key) {
    if (c == '~') esc += "~0";
    else if (c == '/') esc += "~1";
    else esc += c;
  }
  return ptr + "/" + esc;
}

std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

void require_object(const json& j, const std::string& ptr) {
  if (!j.is_object()) throw ConfigError(ptr.empty() ? "/" : ptr, "expected an object");
}

void allow_keys(const json& j, const std::string& ptr, std::initializer_list<const char*> keys) {
  require_object(j, ptr);
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.contains(k)) throw ConfigError(child(ptr, k), "unknown key");
}

const json& need(const json& j, const std::string& ptr, const char* key) {
  if (!j.contains(key)) throw ConfigError(child(ptr, key), "missing required key");
  return j.at(key);
}

double number(const json& j, const std::string& ptr) {
  if (!j.is_number()) throw ConfigError(ptr, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(ptr, "number must be finite");
  return v;
}

std::int64_t integer(const json& j, const std::string& ptr) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.0e15) return static_cast<std::int64_t>(v);
  }
  throw ConfigError(ptr, "expected an integer");
}

std::uint64_t unsigned_integer(const json& j, const std::string& ptr) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  const std::int64_t v = integer(j, ptr);
  if (v < 0) throw ConfigError(ptr, "expected a nonnegative integer");
  return static_cast<std::uint64_t>(v);
}

std::string string(const json& j, const std::string& ptr) {
  if (!j.is_string()) throw ConfigError(ptr, "expected a string");
  return j.get<std::string>();
}

expr::Expr expression(const json& j, const std::string& ptr) {
  if (j.is_number()) return expr::Expr::constant(number(j, ptr));
  const std::string src = string(j, ptr);
  try {
    return expr::parse(src);
  } catch (const ParseError& e) {
    throw ConfigError(ptr, std::string("invalid expression: ") + e.what());
  }
}

template <class T, class F>
void optional_field(const json& j, const std::string& ptr, const char* key, T& target, F convert) {
  if (j.contains(key)) target = convert(j.at(key), child(ptr, key));
}

ScalingTriple parse_scaling(const json& j, const std::string& ptr, ScalingTriple t) {
  allow_keys(j, ptr, {"K", "u", "sigma", "alpha"});
  optional_field(j, ptr, "K", t.K, integer);
  optional_field(j, ptr, "u", t.u, number);
  optional_field(j, ptr, "sigma", t.sigma, number);
  optional_field(j, ptr, "alpha", t.alpha, number);
  try {
    t.check();
  } catch (const PreconditionError& e) {
    throw ConfigError(ptr, e.what());
  }
  return t;
}

MutationKernel parse_kernel(const json& j, const std::string& ptr) {
  allow_keys(j, ptr, {"A", "weights"});
  const std::int64_t A = integer(need(j, ptr, "A"), child(ptr, "A"));
  if (A < 1 || A > 1000) throw ConfigError(child(ptr, "A"), "A must be in [1, 1000]");
  const std::string wptr = child(ptr, "weights");
  const json& w = need(j, ptr, "weights");
  if (!w.is_array()) throw ConfigError(wptr, "expected an array");
  if (w.size() != static_cast<std::size_t>(2 * A + 1))
    throw ConfigError(wptr, "expected " + std::to_string(2 * A + 1) + " weights");
  bool all_numbers = true;
  for (const auto& e : w) all_numbers = all_numbers && e.is_number();
  try {
    if (all_numbers) {
      std::vector<double> v;
      for (std::size_t i = 0; i < w.size(); ++i) v.push_back(number(w[i], child(wptr, i)));
      return MutationKernel(static_cast<int>(A), std::move(v));
    }
    std::vector<expr::Expr> v;
    for (std::size_t i = 0; i < w.size(); ++i) v.push_back(expression(w[i], child(wptr, i)));
    return MutationKernel(static_cast<int>(A), std::move(v));
  } catch (const PreconditionError& e) {
    throw ConfigError(wptr, e.what());
  }
}

std::vector<ScalingTriple> parse_schedule(const json& e, const std::string& ptr, const ScalingTriple& base) {
  const std::string sptr = child(ptr, "schedule");
  const json& s = need(e, ptr, "schedule");
  if (!s.is_array() || s.empty()) throw ConfigError(sptr, "expected a non-empty array");
  double sigma_exponent = -0.3, u_coefficient = 0.1, u_sigma_power = 1.2;
  optional_field(e, ptr, "sigma_exponent", sigma_exponent, number);
  optional_field(e, ptr, "u_coefficient", u_coefficient, number);
  optional_field(e, ptr, "u_sigma_power", u_sigma_power, number);
  std::vector<ScalingTriple> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::string p = child(sptr, i);
    allow_keys(s[i], p, {"K", "u", "sigma", "alpha"});
    ScalingTriple t = base;
    optional_field(s[i], p, "K", t.K, integer);
    if (t.K < 2 && !(s[i].contains("sigma") && s[i].contains("u")))
      throw ConfigError(child(p, "K"), "K must be >= 2 when sigma or u is derived from it");
    const double K = static_cast<double>(t.K);
    t.sigma = s[i].contains("sigma") ? number(s[i].at("sigma"), child(p, "sigma")) : std::pow(K, sigma_exponent);
    t.u = s[i].contains("u") ? number(s[i].at("u"), child(p, "u"))
                             : u_coefficient * std::pow(t.sigma, u_sigma_power) / (K * std::log(K));
    optional_field(s[i], p, "alpha", t.alpha, number);
    try {
      t.check();
    } catch (const PreconditionError& err) {
      throw ConfigError(p, err.what());
    }
    out.push_back(t);
  }
  return out;
}

ExperimentPlan parse_experiment(const json& e, const std::string& ptr, const ModelSpec& spec, std::uint64_t seed) {
  allow_keys(e, ptr,
             {"name", "kind", "schedule", "sigma_exponent", "u_coefficient", "u_sigma_power", "replicates", "horizon",
              "grid_points", "epsilon", "cead_dt", "h", "trials", "slack", "margins"});
  ExperimentPlan plan;
  plan.spec = spec;
  plan.master_seed = seed;
  try {
    plan.kind = plan_kind_from_string(string(need(e, ptr, "kind"), child(ptr, "kind")));
  } catch (const PreconditionError& err) {
    throw ConfigError(child(ptr, "kind"), err.what());
  }
  optional_field(e, ptr, "name", plan.name, string);
  plan.schedule = parse_schedule(e, ptr, spec.scaling);
  optional_field(e, ptr, "replicates", plan.replicates, unsigned_integer);
  optional_field(e, ptr, "horizon", plan.horizon, number);
  std::uint64_t grid = plan.grid_points;
  optional_field(e, ptr, "grid_points", grid, unsigned_integer);
  plan.grid_points = grid;
  optional_field(e, ptr, "epsilon", plan.epsilon, number);
  optional_field(e, ptr, "cead_dt", plan.cead_dt, number);
  std::int64_t h = plan.h;
  optional_field(e, ptr, "h", h, integer);
  if (h < -1000 || h > 1000) throw ConfigError(child(ptr, "h"), "h out of range");
  plan.h = static_cast<int>(h);
  optional_field(e, ptr, "trials", plan.trials, unsigned_integer);
  optional_field(e, ptr, "slack", plan.slack, number);
  if (e.contains("margins")) {
    const std::string mp = child(ptr, "margins");
    const json& m = e.at("margins");
    if (!m.is_array() || m.size() != 2) throw ConfigError(mp, "expected [margin1, margin2]");
    plan.margins = {number(m[0], child(mp, 0)), number(m[1], child(mp, 1))};
  }
  try {
    plan.check();
  } catch (const PreconditionError& err) {
    throw ConfigError(ptr, err.what());
  }
  return plan;
}

}  // namespace

Config parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("malformed JSON: ") + e.what());
  }
  allow_keys(j, "", {"space", "rates", "kernel", "x0", "scaling", "experiment", "seed"});
  Config cfg;
  ModelSpec& spec = cfg.spec;

  const json& space = need(j, "", "space");
  allow_keys(space, "/space", {"lo", "hi"});
  spec.space.lo = number(need(space, "/space", "lo"), "/space/lo");
  spec.space.hi = number(need(space, "/space", "hi"), "/space/hi");
  if (!(spec.space.lo < spec.space.hi)) throw ConfigError("/space", "need lo < hi");

  const json& rates = need(j, "", "rates");
  allow_keys(rates, "/rates", {"b", "d", "c", "m"});
  spec.rates.b = expression(need(rates, "/rates", "b"), "/rates/b");
  spec.rates.d = expression(need(rates, "/rates", "d"), "/rates/d");
  spec.rates.c = expression(need(rates, "/rates", "c"), "/rates/c");
  spec.rates.m = expression(need(rates, "/rates", "m"), "/rates/m");
  for (const char* k : {"b", "d", "m"}) {
    const auto& e = k[0] == 'b' ? spec.rates.b : k[0] == 'd' ? spec.rates.d : spec.rates.m;
    if (e.uses(expr::Variable::Y)) throw ConfigError(child("/rates", k), "may only depend on x");
  }

  spec.kernel = j.contains("kernel") ? parse_kernel(j.at("kernel"), "/kernel") : MutationKernel::symmetric_unit();
  spec.x0 = number(need(j, "", "x0"), "/x0");
  if (j.contains("scaling")) spec.scaling = parse_scaling(j.at("scaling"), "/scaling", ScalingTriple{});
  if (j.contains("seed")) cfg.seed = unsigned_integer(j.at("seed"), "/seed");
  if (j.contains("experiment")) cfg.experiment = parse_experiment(j.at("experiment"), "/experiment", spec, cfg.seed);
  return cfg;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error("read from " + path.string() + " failed");
  return ss.str();
}

Config load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

}  // namespace eadlab
