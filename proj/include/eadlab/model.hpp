#pragma once

// Model specification: trait space, rate functions, mutation kernel and the
// scaling triple (K, u_K, sigma_K, alpha), plus grid validation of the
// standing assumptions on the rates.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eadlab/expr.hpp"

namespace eadlab {

struct TraitSpace {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  double width() const { return hi - lo; }
};

/// Distribution of the integer jump h in [-A, A]. Weights are either one
/// constant vector of length 2A+1 or one expression in x per h.
class MutationKernel {
 public:
  MutationKernel() = default;
  MutationKernel(int A, std::vector<double> weights);
  MutationKernel(int A, std::vector<expr::Expr> weights);

  /// Uniform kernel on {-1, +1}.
  static MutationKernel symmetric_unit();

  int max_jump() const { return A_; }
  bool is_constant() const { return expr_weights_.empty(); }
  const std::vector<double>& constant_weights() const { return const_weights_; }

  /// Weight of jump h at trait x; 0 outside [-A, A].
  double weight(double x, int h) const;
  /// All 2A+1 weights at x, index h + A.
  std::vector<double> weights_at(double x) const;

 private:
  int A_ = 1;
  std::vector<double> const_weights_{0.5, 0.0, 0.5};
  std::vector<expr::Expr> expr_weights_;
};

struct RateFunctions {
  expr::Expr b;  ///< birth rate b(x)
  expr::Expr d;  ///< death rate d(x)
  expr::Expr c;  ///< competition kernel c(x, y)
  expr::Expr m;  ///< mutation probability m(x)
};

struct ScalingTriple {
  std::int64_t K = 1000;
  double u = 1e-6;      ///< mutation probability scale u_K
  double sigma = 0.1;   ///< mutation step scale sigma_K
  double alpha = 0.1;

  /// Throws PreconditionError unless K >= 1, 0 < u <= 1, 0 <= sigma <= 1 and
  /// 0 < alpha < 1/2. sigma = 0 is accepted for degenerate simulations.
  void check() const;
};

struct ModelSpec {
  TraitSpace space;
  RateFunctions rates;
  MutationKernel kernel;
  double x0 = 0.0;
  ScalingTriple scaling;

  double b(double x) const { return rates.b.eval(x); }
  double d(double x) const { return rates.d.eval(x); }
  double c(double x, double y) const { return rates.c.eval(x, y); }
  double m(double x) const { return rates.m.eval(x); }
};

/// Linear-birth reference model: X = [0, 1], b = 1 + 0.5x, d = 0.5, c = 1,
/// m = 1, uniform kernel on {-1, +1}, x0 = 0.
ModelSpec linear_birth_spec();

struct ValidationCheck {
  std::string name;
  bool passed = true;
  std::optional<double> witness_x;
  std::optional<double> witness_y;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  std::size_t grid_points = 0;
  double b_max = 0.0;
  double d_max = 0.0;
  double c_max = 0.0;
  double c_diag_min = 0.0;
  double b_min = 0.0;
  double m_max = 0.0;
  double zbar_max = 0.0;
  double min_abs_gradient = 0.0;
  int gradient_sign = 0;

  bool passed() const;
  const ValidationCheck* find(const std::string& name) const;
  /// Upper bound on total mass used as a runtime blowup guard: 4 b_max / c_diag_min.
  double mass_cap() const { return 4.0 * b_max / c_diag_min; }
};

/// Validates the rates on a uniform grid (product grid for c). Expression
/// domain errors become failed checks. Check names:
///   "x0 in X", "b bounded", "d bounded", "c bounded", "rates nonnegative",
///   "b-d>0", "c(x,x)>=c_min>0", "0<=m<=1", "kernel", "d1f!=0".
ValidationReport validate_model(const ModelSpec& spec, std::size_t grid_points = 1001);

/// Kernel weights at x restricted to jumps that keep x + sigma h inside X,
/// renormalized to sum to 1. Zero-weight jumps are dropped; the result is
/// empty when no admissible jump has positive weight.
std::vector<std::pair<int, double>> admissible_kernel_at(const ModelSpec& spec, double x,
                                                         double sigma);
inline std::vector<std::pair<int, double>> admissible_kernel_at(const ModelSpec& spec, double x) {
  return admissible_kernel_at(spec, x, spec.scaling.sigma);
}

/// Unnormalized kernel mass on the admissible jumps at x (1 in the interior).
double admissible_mass(const ModelSpec& spec, double x, double sigma);

struct ScalingReport {
  double r1 = 0.0;  ///< K^(-1/2+alpha) / sigma
  double r2 = 0.0;  ///< sigma / 1
  double r3 = 0.0;  ///< exp(-K^alpha) / u
  double r4 = 0.0;  ///< u K ln K / sigma^(1+alpha)
  double margin1 = 0.5;
  double margin2 = 0.5;
  bool regime_consistent = false;
  std::vector<std::string> violations;
};

/// The asymptotic scaling relations evaluated at one K. Consistent iff
/// r1 <= margin1, r3 <= margin1 and r4 <= margin2.
ScalingReport validate_scaling(const ScalingTriple& t, std::pair<double, double> margins = {0.5, 0.5});

}  // namespace eadlab
