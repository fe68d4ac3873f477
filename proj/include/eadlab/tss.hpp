#pragma once

// Trait substitution sequence: the pure-jump limit of the monomorphic
// population under rare mutations, with jump h at rate
//   m(x) b(x) zbar(x) [f(x + sigma h, x)]_+ / b(x + sigma h) M(x, h).

#include <utility>
#include <vector>

#include "eadlab/model.hpp"
#include "eadlab/rng.hpp"

namespace eadlab {

/// Piecewise-constant, right-continuous path: value states[k] on
/// [times[k], times[k+1]). times[0] = 0 for a non-empty path.
struct JumpPath {
  std::vector<double> times;
  std::vector<double> states;
  double sigma = 0.0;
  double horizon = 0.0;

  bool empty() const { return times.empty(); }
  std::size_t jumps() const { return times.empty() ? 0 : times.size() - 1; }
  double value_at(double t) const;
};

/// Rates for every admissible jump h != 0 (those with x + sigma h in X),
/// using the raw kernel weight M(x, h).
std::vector<std::pair<int, double>> tss_rates(const ModelSpec& spec, double x, double sigma);

JumpPath simulate_tss(const ModelSpec& spec, double x0, double sigma, double T, Rng& rng);

/// Time axis multiplied by sigma^2.
JumpPath rescaled_tss_path(const JumpPath& path);

}  // namespace eadlab
