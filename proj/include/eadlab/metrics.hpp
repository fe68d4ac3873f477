#pragma once

// Kantorovich-Rubinstein (bounded-Lipschitz) norm of finite signed atomic
// measures on the line,
//   ||mu||_0 = sup { int f dmu : |f| <= 1, f 1-Lipschitz },
// and sup-in-time distances between simulated populations and the
// canonical-equation reference path zbar(x_t) delta_{x_t}.

#include <cstddef>
#include <utility>
#include <vector>

#include "eadlab/ibm.hpp"
#include "eadlab/model.hpp"
#include "eadlab/ode.hpp"

namespace eadlab {

/// Atoms sorted by strictly increasing position, all weights nonzero.
class SignedAtomicMeasure {
 public:
  SignedAtomicMeasure() = default;
  /// Sorts, merges coincident positions and drops zero weights. Throws
  /// PreconditionError on non-finite input.
  explicit SignedAtomicMeasure(std::vector<std::pair<double, double>> atoms);

  static SignedAtomicMeasure dirac(double x, double w = 1.0);

  const std::vector<std::pair<double, double>>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  double total_variation() const;

  SignedAtomicMeasure operator-() const;
  SignedAtomicMeasure scaled(double c) const;
  friend SignedAtomicMeasure operator+(const SignedAtomicMeasure& a, const SignedAtomicMeasure& b);
  friend SignedAtomicMeasure operator-(const SignedAtomicMeasure& a, const SignedAtomicMeasure& b);

 private:
  std::vector<std::pair<double, double>> atoms_;
};

/// Exact LP value: maximize sum f_i w_i over -1 <= f_i <= 1 and
/// |f_{i+1} - f_i| <= x_{i+1} - x_i.
double kr_norm(const SignedAtomicMeasure& mu);

double kr_distance(const SignedAtomicMeasure& mu, const SignedAtomicMeasure& nu);

/// Grid maximization over f_i in {-1, -1 + delta, ..., 1}, delta = 1e-3,
/// restricted to feasible grid vectors. Never exceeds kr_norm. At most 6
/// atoms (PreconditionError otherwise).
double kr_bruteforce(const SignedAtomicMeasure& mu);

inline constexpr std::size_t kBruteforceMaxAtoms = 6;

/// Population sample as a measure with weights count / K.
SignedAtomicMeasure sample_measure(const Trajectory::Sample& s, std::int64_t K);

/// KR distance between each sample and zbar(x_t) delta_{x_t}, with x_t the
/// canonical-equation path linearly interpolated at the sample time.
std::vector<double> traj_kr_profile(const Trajectory& traj, const OdeSolution& cead, const ModelSpec& spec);

/// Maximum of traj_kr_profile (0 for a trajectory without samples).
double traj_sup_distance(const Trajectory& traj, const OdeSolution& cead, const ModelSpec& spec);

}  // namespace eadlab
