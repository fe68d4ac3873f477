#include "eadlab/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "eadlab/analytic.hpp"
#include "eadlab/config.hpp"
#include "eadlab/error.hpp"
#include "eadlab/harness.hpp"
#include "eadlab/ibm.hpp"
#include "eadlab/metrics.hpp"
#include "eadlab/ode.hpp"
#include "eadlab/oracles.hpp"
#include "eadlab/tss.hpp"

namespace eadlab {

using json = nlohmann::json;

namespace {

struct UsageError : Error {
  using Error::Error;
};

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::string format = "csv";
  std::optional<std::uint64_t> replicates;
  unsigned workers = 0;
};

Config need_config(const Options& o) {
  if (o.config.empty()) throw UsageError("--config is required");
  return load_config(o.config);
}

std::uint64_t seed_of(const Options& o, const Config& c) { return o.seed ? *o.seed : c.seed; }

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      v.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string("bad number in ") + what + ": '" + item + "'");
    }
  }
  if (v.empty()) throw UsageError(std::string(what) + " is empty");
  return v;
}

// ---- csv helpers ----

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name, const std::string& file) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw Error(file + ": missing column '" + name + "'");
  }
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Table read_csv(const std::string& path) {
  std::stringstream ss(read_file(path));
  Table t;
  std::string line;
  if (!std::getline(ss, line)) throw Error(path + ": empty file");
  t.header = split_csv_line(line);
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split_csv_line(line));
    if (t.rows.back().size() != t.header.size()) throw Error(path + ": ragged row " + std::to_string(t.rows.size()));
  }
  return t;
}

double cell_number(const std::string& s, const std::string& file) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(file + ": bad number '" + s + "'");
}

std::string join_numbers(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
  return s;
}

Format output_format(const Options& o, bool allow_svg) {
  Format f;
  try {
    f = format_from_string(o.format);
  } catch (const PreconditionError& e) {
    throw UsageError(e.what());
  }
  if (f == Format::Svg && !allow_svg) throw UsageError("--format svg is only available for experiment");
  return f;
}

std::filesystem::path out_dir(const Options& o) {
  std::error_code ec;
  std::filesystem::create_directories(o.out, ec);
  if (ec) throw Error("cannot create directory " + o.out + ": " + ec.message());
  return o.out;
}

// ---- subcommands ----

int cmd_validate(const Options& o, std::ostream& out) {
  const Config cfg = need_config(o);
  const ValidationReport rep = validate_model(cfg.spec);
  out << "model checks (" << rep.grid_points << "-point grid)\n";
  for (const auto& c : rep.checks) {
    out << "  " << (c.passed ? "ok  " : "FAIL") << "  " << c.name;
    if (!c.passed) {
      if (c.witness_x) out << "  x=" << format_number(*c.witness_x);
      if (c.witness_y) out << " y=" << format_number(*c.witness_y);
      if (!c.detail.empty()) out << "  " << c.detail;
    }
    out << '\n';
  }
  if (rep.passed()) {
    out << "  b_max=" << format_number(rep.b_max) << " d_max=" << format_number(rep.d_max)
        << " c_max=" << format_number(rep.c_max) << " c_diag_min=" << format_number(rep.c_diag_min)
        << " zbar_max=" << format_number(rep.zbar_max) << " mass_cap=" << format_number(rep.mass_cap()) << '\n';
    out << "  fitness gradient sign " << rep.gradient_sign << ", min |d1f| = " << format_number(rep.min_abs_gradient)
        << '\n';
  }
  const auto& t = cfg.spec.scaling;
  out << "scaling K=" << t.K << " u=" << format_number(t.u) << " sigma=" << format_number(t.sigma)
      << " alpha=" << format_number(t.alpha) << '\n';
  if (t.sigma > 0.0) {
    const ScalingReport sr = validate_scaling(t);
    out << "  r1=" << format_number(sr.r1) << " r2=" << format_number(sr.r2) << " r3=" << format_number(sr.r3)
        << " r4=" << format_number(sr.r4) << '\n';
    out << "  regime consistent: " << (sr.regime_consistent ? "yes" : "no") << '\n';
    for (const auto& v : sr.violations) out << "  warning: " << v << '\n';
  }
  out << (rep.passed() ? "model valid\n" : "model INVALID\n");
  return rep.passed() ? kExitOk : kExitInvalid;
}

int cmd_simulate_ibm(const Options& o, double horizon, std::size_t grid, double epsilon, std::ostream& out) {
  const Config cfg = need_config(o);
  const ValidationReport vr = validate_model(cfg.spec);
  if (!vr.passed()) throw PreconditionError("model fails validation; run `validate` for details");
  const Format f = output_format(o, false);
  RunOptions opts;
  opts.horizon = horizon;
  opts.grid_points = grid;
  opts.epsilon = epsilon;
  opts.mass_cap = vr.mass_cap();
  Rng rng(seed_of(o, cfg));
  const Trajectory tr = run(cfg.spec, opts, rng);
  const auto dir = out_dir(o);
  const double inv_K = 1.0 / static_cast<double>(tr.K);
  if (f == Format::Csv) {
    std::ostringstream atoms, summary, muts;
    atoms << "t,label,trait,count,weight\n";
    summary << "t,wall_time,total_mass,mean_trait,L\n";
    for (const auto& s : tr.samples) {
      summary << format_number(s.t) << ',' << format_number(s.wall_time) << ',' << format_number(s.total_mass) << ','
              << format_number(s.mean_trait) << ',' << s.L << '\n';
      for (const auto& a : s.atoms)
        atoms << format_number(s.t) << ',' << a.label << ',' << format_number(a.trait) << ',' << a.count << ','
              << format_number(static_cast<double>(a.count) * inv_K) << '\n';
    }
    muts << "wall_time,parent_label,parent_trait,h,new_label,new_trait\n";
    for (const auto& m : tr.mutations)
      muts << format_number(m.time) << ',' << m.parent_label << ',' << format_number(m.parent_trait) << ',' << m.h
           << ',' << m.new_label << ',' << format_number(m.new_trait) << '\n';
    write_file(dir / "traj.csv", atoms.str());
    write_file(dir / "traj.summary.csv", summary.str());
    write_file(dir / "mutations.csv", muts.str());
  } else {
    json samples = json::array();
    for (const auto& s : tr.samples) {
      json atoms = json::array();
      for (const auto& a : s.atoms) atoms.push_back({{"label", a.label}, {"trait", a.trait}, {"count", a.count}});
      samples.push_back({{"t", s.t}, {"wall_time", s.wall_time}, {"total_mass", s.total_mass},
                         {"mean_trait", s.mean_trait}, {"L", s.L}, {"atoms", std::move(atoms)}});
    }
    json muts = json::array();
    for (const auto& m : tr.mutations)
      muts.push_back({{"wall_time", m.time}, {"parent_label", m.parent_label}, {"parent_trait", m.parent_trait},
                      {"h", m.h}, {"new_label", m.new_label}, {"new_trait", m.new_trait}});
    json inv = json::array();
    for (const auto& i : tr.invasions) inv.push_back({{"t", i.time}, {"label", i.label}, {"trait", i.trait}});
    const json j = {{"K", tr.K}, {"time_scale", tr.time_scale}, {"status", to_string(tr.status)},
                    {"stop_time", tr.stop_time}, {"clonal_births", tr.clonal_births},
                    {"mutant_births", tr.mutant_births}, {"deaths", tr.deaths}, {"initial_count", tr.initial_count},
                    {"final_count", tr.final_count}, {"final_L", tr.final_L}, {"samples", std::move(samples)},
                    {"mutations", std::move(muts)}, {"invasions", std::move(inv)}};
    write_file(dir / "traj.json", j.dump(2) + "\n");
  }
  out << "status " << to_string(tr.status) << ", stop time " << format_number(tr.stop_time) << ", events "
      << tr.events() << ", mutations " << tr.mutant_births << ", invasions " << tr.invasions.size() << '\n';
  return tr.status == RunStatus::Horizon ? kExitOk : kExitAbort;
}

int cmd_simulate_tss(const Options& o, double horizon, std::optional<double> sigma, std::ostream& out) {
  const Config cfg = need_config(o);
  const Format f = output_format(o, false);
  const double s = sigma ? *sigma : cfg.spec.scaling.sigma;
  if (!(s > 0.0)) throw PreconditionError("sigma must be > 0");
  Rng rng(seed_of(o, cfg));
  const JumpPath path = rescaled_tss_path(simulate_tss(cfg.spec, cfg.spec.x0, s, horizon / (s * s), rng));
  const auto dir = out_dir(o);
  if (f == Format::Csv) {
    std::ostringstream os;
    os << "t,x\n";
    for (std::size_t i = 0; i < path.times.size(); ++i)
      os << format_number(path.times[i]) << ',' << format_number(path.states[i]) << '\n';
    write_file(dir / "tss.csv", os.str());
  } else {
    write_file(dir / "tss.json", json{{"sigma", s}, {"horizon", path.horizon}, {"t", path.times},
                                      {"x", path.states}}.dump(2) + "\n");
  }
  out << "jumps " << path.jumps() << ", endpoint " << format_number(path.value_at(path.horizon)) << '\n';
  return kExitOk;
}

void write_series(const std::filesystem::path& dir, const std::string& stem, Format f, const OdeSolution& sol,
                  const std::vector<std::string>& names) {
  if (f == Format::Csv) {
    std::ostringstream os;
    os << "t";
    for (const auto& n : names) os << ',' << n;
    os << '\n';
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
      os << format_number(sol.times[k]);
      for (double v : sol.states[k]) os << ',' << format_number(v);
      os << '\n';
    }
    write_file(dir / (stem + ".csv"), os.str());
  } else {
    json j = {{"terminal_reason", to_string(sol.terminal_reason)}, {"t", sol.times}, {"states", sol.states}};
    write_file(dir / (stem + ".json"), j.dump(2) + "\n");
  }
}

int cmd_integrate_cead(const Options& o, double horizon, double dt, std::ostream& out) {
  const Config cfg = need_config(o);
  const Format f = output_format(o, false);
  const OdeSolution sol = integrate_cead(cfg.spec, cfg.spec.x0, horizon, dt);
  write_series(out_dir(o), "cead", f, sol, {"x"});
  out << std::setprecision(17) << "endpoint " << format_number(sol.final_state()[0]) << ", terminal "
      << to_string(sol.terminal_reason) << '\n';
  return kExitOk;
}

int cmd_integrate_lv(const Options& o, const std::string& traits, const std::string& z0, double horizon, double dt,
                     std::ostream& out) {
  const Config cfg = need_config(o);
  const Format f = output_format(o, false);
  const auto x = parse_list(traits, "--traits");
  const auto z = parse_list(z0, "--z0");
  if (x.size() != z.size()) throw UsageError("--traits and --z0 need the same length");
  const OdeSolution sol = integrate_lv(cfg.spec, x, z, horizon, dt);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < x.size(); ++i) names.push_back("z" + std::to_string(i));
  write_series(out_dir(o), "lv", f, sol, names);
  out << "endpoint " << join_numbers(sol.final_state()) << ", terminal " << to_string(sol.terminal_reason) << '\n';
  return sol.terminal_reason == TerminalReason::Blowup ? kExitAbort : kExitOk;
}

int cmd_oracle(const std::string& name, const std::vector<std::string>& raw, std::ostream& out) {
  std::vector<double> a;
  for (const auto& s : raw) {
    try {
      std::size_t pos = 0;
      a.push_back(std::stod(s, &pos));
      if (pos != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw UsageError("oracle argument '" + s + "' is not a number");
    }
  }
  auto want = [&](std::size_t n, const char* usage) {
    if (a.size() != n) throw UsageError("usage: oracle " + name + " " + usage);
  };
  auto as_int = [&](std::size_t i) {
    if (a[i] != std::floor(a[i]) || std::fabs(a[i]) > 9e15)
      throw UsageError("oracle argument " + std::to_string(i + 1) + " must be an integer");
    return static_cast<std::int64_t>(a[i]);
  };
  out << std::setprecision(10);
  if (name == "hitting-prob") {
    want(4, "b d j k");
    out << oracles::bd_hitting_prob({a[0], a[1]}, as_int(2), as_int(3)) << '\n';
  } else if (name == "invasion-limit") {
    want(3, "b d k");
    const auto r = oracles::invasion_prob_limit({a[0], a[1]}, as_int(2));
    out << r.limit << ' ' << r.error_bound << '\n';
  } else if (name == "absorption-time") {
    want(4, "b d n k");
    out << oracles::expected_absorption_time({a[0], a[1]}, as_int(2), as_int(3)) << '\n';
  } else if (name == "ratio-bound") {
    want(2, "eps k");
    out << oracles::conditioned_time_ratio_bound(a[0], a[1]) << '\n';
  } else if (name == "extinction-cdf") {
    want(4, "b d n t");
    out << oracles::extinction_time_cdf({a[0], a[1]}, as_int(2), a[3]) << '\n';
  } else if (name == "laplace") {
    want(3, "b d lambda");
    out << oracles::occupation_laplace({a[0], a[1]}, a[2]) << '\n';
  } else if (name == "chain-exit") {
    want(7, "C1 C2 eps sigma K a M");
    out << oracles::chain_exit_prob(a[0], a[1], a[2], a[3], as_int(4), as_int(5), a[6]) << '\n';
  } else if (name == "walk-ruin") {
    want(5, "C sigma start lo hi");
    out << oracles::biased_walk_ruin(a[0], a[1], as_int(2), as_int(3), as_int(4)) << '\n';
  } else {
    throw UsageError("unknown oracle '" + name +
                     "' (hitting-prob, invasion-limit, absorption-time, ratio-bound, extinction-cdf, laplace, "
                     "chain-exit, walk-ruin)");
  }
  return kExitOk;
}

int cmd_experiment(const Options& o, const std::string& plan_path, std::ostream& out) {
  Config cfg = load_config(plan_path);
  if (!cfg.experiment) throw ConfigError("/experiment", "missing required key");
  ExperimentPlan plan = *cfg.experiment;
  if (o.seed) plan.master_seed = *o.seed;
  if (o.replicates) {
    if (*o.replicates < 1) throw UsageError("--replicates must be >= 1");
    plan.replicates = *o.replicates;
  }
  const Format f = output_format(o, true);
  Timing timing;
  const ExperimentReport rep = run_experiment(plan, o.workers, &timing);
  const auto dir = out_dir(o);
  for (const auto& p : emit(rep, dir, f)) out << "wrote " << p.string() << '\n';
  out << "wrote " << emit_timing(rep, timing, dir).string() << '\n';
  for (const auto& row : rep.rows) {
    out << "point " << row.index << ": K=" << row.scaling.K << " sigma=" << format_number(row.scaling.sigma)
        << " completed " << row.completed << "/" << row.replicates;
    if (rep.kind == PlanKind::InvasionMc || rep.kind == PlanKind::OracleSuite)
      out << " rate " << format_number(row.success_rate.mean) << " +- " << format_number(row.success_rate.se)
          << " oracle " << format_number(row.oracle_prob);
    else
      out << " distance " << format_number(row.distance.mean) << " +- " << format_number(row.distance.se);
    out << (row.regime.regime_consistent ? "" : " (scaling regime not consistent)") << '\n';
  }
  out << "monotone decreasing: " << (rep.monotone_decreasing ? "yes" : "no") << '\n';
  if (rep.failed) {
    out << "experiment failed: " << rep.failure << '\n';
    return kExitAbort;
  }
  return kExitOk;
}

int cmd_compare(const Options& o, const std::string& traj_path, const std::string& cead_path, std::ostream& out) {
  const Config cfg = need_config(o);
  const Table traj = read_csv(traj_path);
  const Table cead = read_csv(cead_path);
  const std::size_t tt = traj.column("t", traj_path), tx = traj.column("trait", traj_path),
                    tw = traj.column("weight", traj_path);
  const std::size_t ct = cead.column("t", cead_path), cx = cead.column("x", cead_path);
  OdeSolution ref;
  for (const auto& r : cead.rows) {
    ref.times.push_back(cell_number(r[ct], cead_path));
    ref.states.push_back({cell_number(r[cx], cead_path)});
  }
  if (ref.times.empty()) throw Error(cead_path + ": no rows");
  std::map<double, std::vector<std::pair<double, double>>> samples;
  for (const auto& r : traj.rows)
    samples[cell_number(r[tt], traj_path)].emplace_back(cell_number(r[tx], traj_path),
                                                         cell_number(r[tw], traj_path));
  double sup = 0.0, at = 0.0;
  for (const auto& [t, atoms] : samples) {
    const double x = ref.interpolate(t);
    const double d = kr_distance(SignedAtomicMeasure(atoms),
                                 SignedAtomicMeasure::dirac(x, equilibrium_mass(cfg.spec, x)));
    if (d > sup) {
      sup = d;
      at = t;
    }
  }
  out << "sup-KR distance " << format_number(sup) << " at t=" << format_number(at) << " over " << samples.size()
      << " samples\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"eadlab: adaptive-dynamics simulations, oracles and convergence experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "model configuration (JSON)");
  app.add_option("--seed", o.seed, "master seed (overrides the config)");
  app.add_option("--out", o.out, "output directory")->capture_default_str();
  app.add_option("--format", o.format, "csv, json or svg")->capture_default_str();
  app.add_option("--replicates", o.replicates, "replicate count (experiment)");
  app.add_option("--workers", o.workers, "worker threads (default EADLAB_WORKERS or all cores)");

  auto* validate = app.add_subcommand("validate", "check the model assumptions and the scaling regime");

  double ibm_T = 1.0, ibm_eps = 1.0;
  std::size_t ibm_grid = 101;
  auto* sim_ibm = app.add_subcommand("simulate-ibm", "simulate the individual-based model");
  sim_ibm->add_option("--T", ibm_T, "rescaled horizon")->capture_default_str();
  sim_ibm->add_option("--grid", ibm_grid, "sample grid points")->capture_default_str();
  sim_ibm->add_option("--epsilon", ibm_eps, "invasion threshold factor")->capture_default_str();

  double tss_T = 1.0;
  std::optional<double> tss_sigma;
  auto* sim_tss = app.add_subcommand("simulate-tss", "simulate the trait substitution sequence");
  sim_tss->add_option("--T", tss_T, "rescaled horizon")->capture_default_str();
  sim_tss->add_option("--sigma", tss_sigma, "mutation step (default: config scaling.sigma)");

  double cead_T = 1.0, cead_dt = 1e-3;
  auto* cead = app.add_subcommand("integrate-cead", "integrate the canonical equation");
  cead->add_option("--T", cead_T, "horizon")->capture_default_str();
  cead->add_option("--dt", cead_dt, "RK4 step")->capture_default_str();

  double lv_T = 10.0, lv_dt = 1e-3;
  std::string lv_traits, lv_z0;
  auto* lv = app.add_subcommand("integrate-lv", "integrate the Lotka-Volterra system");
  lv->add_option("--traits", lv_traits, "comma-separated traits")->required();
  lv->add_option("--z0", lv_z0, "comma-separated initial densities")->required();
  lv->add_option("--T", lv_T, "horizon")->capture_default_str();
  lv->add_option("--dt", lv_dt, "RK4 step")->capture_default_str();

  std::string oracle_name;
  std::vector<std::string> oracle_args;
  auto* oracle = app.add_subcommand("oracle", "evaluate a closed-form oracle");
  oracle->add_option("name", oracle_name, "oracle name")->required();
  oracle->add_option("args", oracle_args, "numeric arguments");
  oracle->allow_extras(false);
  oracle->positionals_at_end();

  std::string plan_path;
  auto* experiment = app.add_subcommand("experiment", "run a convergence experiment");
  experiment->add_option("plan", plan_path, "plan file (JSON config with an experiment block)")->required();

  std::string traj_path, cead_path;
  auto* compare = app.add_subcommand("compare", "sup-KR distance between an IBM trajectory and a CEAD path");
  compare->add_option("traj", traj_path, "traj.csv from simulate-ibm")->required();
  compare->add_option("cead", cead_path, "cead.csv from integrate-cead")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(o, out);
    if (*sim_ibm) return cmd_simulate_ibm(o, ibm_T, ibm_grid, ibm_eps, out);
    if (*sim_tss) return cmd_simulate_tss(o, tss_T, tss_sigma, out);
    if (*cead) return cmd_integrate_cead(o, cead_T, cead_dt, out);
    if (*lv) return cmd_integrate_lv(o, lv_traits, lv_z0, lv_T, lv_dt, out);
    if (*oracle) return cmd_oracle(oracle_name, oracle_args, out);
    if (*experiment) return cmd_experiment(o, plan_path, out);
    if (*compare) return cmd_compare(o, traj_path, cead_path, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const DomainError& e) {
    err << "runtime abort: " << e.what() << '\n';
    return kExitAbort;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitAbort;
  }
  return kExitUsage;
}

}  // namespace eadlab
