#include "eadlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "eadlab/analytic.hpp"
#include "eadlab/error.hpp"

namespace eadlab {

MutationKernel::MutationKernel(int A, std::vector<double> weights)
    : A_(A), const_weights_(std::move(weights)) {
  if (A < 1) throw PreconditionError("kernel A must be >= 1");
  if (const_weights_.size() != static_cast<std::size_t>(2 * A + 1))
    throw PreconditionError("kernel needs 2A+1 weights");
}

MutationKernel::MutationKernel(int A, std::vector<expr::Expr> weights)
    : A_(A), const_weights_(), expr_weights_(std::move(weights)) {
  if (A < 1) throw PreconditionError("kernel A must be >= 1");
  if (expr_weights_.size() != static_cast<std::size_t>(2 * A + 1))
    throw PreconditionError("kernel needs 2A+1 weights");
}

MutationKernel MutationKernel::symmetric_unit() { return MutationKernel(1, {0.5, 0.0, 0.5}); }

double MutationKernel::weight(double x, int h) const {
  if (h < -A_ || h > A_) return 0.0;
  const auto i = static_cast<std::size_t>(h + A_);
  return is_constant() ? const_weights_[i] : expr_weights_[i].eval(x);
}

std::vector<double> MutationKernel::weights_at(double x) const {
  if (is_constant()) return const_weights_;
  std::vector<double> w(expr_weights_.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = expr_weights_[i].eval(x);
  return w;
}

void ScalingTriple::check() const {
  if (K < 1) throw PreconditionError("scaling: K must be >= 1");
  if (!(u > 0.0 && u <= 1.0)) throw PreconditionError("scaling: u must lie in (0, 1]");
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw PreconditionError("scaling: sigma must lie in [0, 1]");
  if (!(alpha > 0.0 && alpha < 0.5)) throw PreconditionError("scaling: alpha must lie in (0, 1/2)");
}

ModelSpec linear_birth_spec() {
  ModelSpec s;
  s.space = {0.0, 1.0};
  s.rates.b = expr::parse("1 + 0.5*x");
  s.rates.d = expr::parse("0.5");
  s.rates.c = expr::parse("1");
  s.rates.m = expr::parse("1");
  s.kernel = MutationKernel::symmetric_unit();
  s.x0 = 0.0;
  s.scaling = {1000, 1e-6, 0.1, 0.1};
  return s;
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

class CheckBuilder {
 public:
  explicit CheckBuilder(std::string name) { check_.name = std::move(name); }

  // First failure wins; later ones are ignored so the witness is the
  // smallest grid point.
  void fail(double x, std::string detail) {
    if (!check_.passed) return;
    check_.passed = false;
    check_.witness_x = x;
    check_.detail = std::move(detail);
  }
  void fail(double x, double y, std::string detail) {
    if (!check_.passed) return;
    fail(x, std::move(detail));
    check_.witness_y = y;
  }
  bool ok() const { return check_.passed; }
  ValidationCheck done() && { return std::move(check_); }

 private:
  ValidationCheck check_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

ValidationReport validate_model(const ModelSpec& spec, std::size_t grid_points) {
  if (grid_points < 2) throw PreconditionError("validate_model: grid_points must be >= 2");
  ValidationReport rep;
  rep.grid_points = grid_points;
  const auto& sp = spec.space;
  const std::size_t n = grid_points;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i)
    grid[i] = i + 1 == n ? sp.hi : sp.lo + sp.width() * static_cast<double>(i) / static_cast<double>(n - 1);

  CheckBuilder x0_check("x0 in X");
  if (!(sp.lo < sp.hi)) x0_check.fail(sp.lo, "trait space needs lo < hi");
  else if (!sp.contains(spec.x0)) x0_check.fail(spec.x0, "x0 outside [lo, hi]");
  rep.checks.push_back(std::move(x0_check).done());

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> b(n, nan), d(n, nan), m(n, nan), cdiag(n, nan);

  auto sample = [&](const expr::Expr& e, std::vector<double>& out, CheckBuilder& chk) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      try {
        out[i] = e.eval(grid[i]);
        mx = std::max(mx, out[i]);
      } catch (const Error& err) {
        chk.fail(grid[i], err.what());
      }
    }
    return mx;
  };
  CheckBuilder b_check("b bounded");
  rep.b_max = sample(spec.rates.b, b, b_check);
  rep.checks.push_back(std::move(b_check).done());
  CheckBuilder d_check("d bounded");
  rep.d_max = sample(spec.rates.d, d, d_check);
  rep.checks.push_back(std::move(d_check).done());

  CheckBuilder c_check("c bounded");
  CheckBuilder nonneg("rates nonnegative");
  double c_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double v = nan;
      try {
        v = spec.rates.c.eval(grid[i], grid[j]);
      } catch (const Error& err) {
        c_check.fail(grid[i], grid[j], err.what());
        continue;
      }
      c_max = std::max(c_max, v);
      if (i == j) cdiag[i] = v;
      if (v < 0.0) nonneg.fail(grid[i], grid[j], "c(x,y) = " + fmt(v) + " < 0");
    }
  }
  rep.c_max = c_max;
  rep.checks.push_back(std::move(c_check).done());

  for (std::size_t i = 0; i < n; ++i) {
    if (b[i] < 0.0) nonneg.fail(grid[i], "b(x) = " + fmt(b[i]) + " < 0");
    if (d[i] < 0.0) nonneg.fail(grid[i], "d(x) = " + fmt(d[i]) + " < 0");
  }
  rep.checks.push_back(std::move(nonneg).done());

  CheckBuilder growth("b-d>0");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(b[i]) || std::isnan(d[i])) growth.fail(grid[i], "rate undefined");
    else if (!(b[i] - d[i] > 0.0)) growth.fail(grid[i], "b(x) - d(x) = " + fmt(b[i] - d[i]) + " <= 0");
  }
  rep.b_min = std::numeric_limits<double>::infinity();
  for (double v : b)
    if (!std::isnan(v)) rep.b_min = std::min(rep.b_min, v);
  rep.checks.push_back(std::move(growth).done());

  CheckBuilder diag("c(x,x)>=c_min>0");
  double cmin = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(cdiag[i])) {
      diag.fail(grid[i], "c(x,x) undefined");
      continue;
    }
    if (cdiag[i] < cmin) {
      cmin = cdiag[i];
      argmin = i;
    }
  }
  rep.c_diag_min = cmin;
  if (diag.ok() && !(cmin > 0.0)) diag.fail(grid[argmin], grid[argmin], "min c(x,x) = " + fmt(cmin) + " <= 0");
  const bool diag_ok = diag.ok();
  rep.checks.push_back(std::move(diag).done());

  CheckBuilder mut("0<=m<=1");
  sample(spec.rates.m, m, mut);
  rep.m_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(m[i])) continue;
    rep.m_max = std::max(rep.m_max, m[i]);
    if (m[i] < 0.0 || m[i] > 1.0) mut.fail(grid[i], "m(x) = " + fmt(m[i]) + " outside [0,1]");
  }
  rep.checks.push_back(std::move(mut).done());

  CheckBuilder kernel("kernel");
  const double tol = spec.kernel.is_constant() ? 1e-12 : 1e-9;
  const std::size_t kernel_points = spec.kernel.is_constant() ? 1 : n;
  for (std::size_t i = 0; i < kernel_points; ++i) {
    try {
      const auto w = spec.kernel.weights_at(grid[i]);
      double sum = 0.0;
      for (double wi : w) {
        if (wi < 0.0) kernel.fail(grid[i], "negative kernel weight " + fmt(wi));
        sum += wi;
      }
      if (std::fabs(sum - 1.0) > tol) kernel.fail(grid[i], "kernel weights sum to " + fmt(sum));
    } catch (const Error& err) {
      kernel.fail(grid[i], err.what());
    }
  }
  rep.checks.push_back(std::move(kernel).done());

  CheckBuilder gradient("d1f!=0");
  rep.min_abs_gradient = std::numeric_limits<double>::infinity();
  bool seen_pos = false;
  bool seen_neg = false;
  rep.zbar_max = 0.0;
  if (!diag_ok) {
    gradient.fail(sp.lo, "equilibrium undefined (c(x,x) check failed)");
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        const auto p = fitness_profile(spec, grid[i]);
        rep.zbar_max = std::max(rep.zbar_max, p.zbar);
        const double a = std::fabs(p.d1f);
        if (a < rep.min_abs_gradient) rep.min_abs_gradient = a;
        if (a <= 1e-12) gradient.fail(grid[i], "d1f(x,x) = " + fmt(p.d1f) + " (evolutionary singularity)");
        else if (p.d1f > 0.0) seen_pos = true;
        else seen_neg = true;
      } catch (const Error& err) {
        gradient.fail(grid[i], err.what());
      }
    }
    if (seen_pos && seen_neg) gradient.fail(sp.lo, "d1f(x,x) changes sign on X");
  }
  rep.gradient_sign = seen_pos && !seen_neg ? 1 : (seen_neg && !seen_pos ? -1 : 0);
  rep.checks.push_back(std::move(gradient).done());
  return rep;
}

std::vector<std::pair<int, double>> admissible_kernel_at(const ModelSpec& spec, double x, double sigma) {
  const int A = spec.kernel.max_jump();
  const auto w = spec.kernel.weights_at(x);
  std::vector<std::pair<int, double>> out;
  double total = 0.0;
  for (int h = -A; h <= A; ++h) {
    const double wi = w[static_cast<std::size_t>(h + A)];
    if (wi <= 0.0) continue;
    if (!spec.space.contains(x + sigma * h)) continue;
    out.emplace_back(h, wi);
    total += wi;
  }
  if (total <= 0.0) return {};
  for (auto& [h, wi] : out) wi /= total;
  return out;
}

double admissible_mass(const ModelSpec& spec, double x, double sigma) {
  const int A = spec.kernel.max_jump();
  const auto w = spec.kernel.weights_at(x);
  double total = 0.0;
  for (int h = -A; h <= A; ++h) {
    const double wi = w[static_cast<std::size_t>(h + A)];
    if (wi > 0.0 && spec.space.contains(x + sigma * h)) total += wi;
  }
  return total;
}

ScalingReport validate_scaling(const ScalingTriple& t, std::pair<double, double> margins) {
  t.check();
  if (!(t.sigma > 0.0)) throw PreconditionError("validate_scaling: sigma must be > 0");
  const double K = static_cast<double>(t.K);
  ScalingReport r;
  r.margin1 = margins.first;
  r.margin2 = margins.second;
  r.r1 = std::pow(K, -0.5 + t.alpha) / t.sigma;
  r.r2 = t.sigma;
  r.r3 = std::exp(-std::pow(K, t.alpha)) / t.u;
  r.r4 = t.u * K * std::log(K) / std::pow(t.sigma, 1.0 + t.alpha);
  if (r.r1 > r.margin1) r.violations.emplace_back("r1 = K^(-1/2+alpha)/sigma exceeds margin1");
  if (r.r3 > r.margin1) r.violations.emplace_back("r3 = exp(-K^alpha)/u exceeds margin1");
  if (r.r4 > r.margin2) r.violations.emplace_back("r4 = u K ln K / sigma^(1+alpha) exceeds margin2");
  r.regime_consistent = r.violations.empty();
  return r;
}

}  // namespace eadlab
