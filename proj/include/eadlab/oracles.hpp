#pragma once

// Exact closed forms for linear birth-death processes and nearest-neighbour
// random walks, and Monte Carlo estimators used to check them.

#include <cstdint>
#include <utility>

#include "eadlab/rng.hpp"

namespace eadlab::oracles {

/// Linear birth-death process with per-capita rates b and d.
struct BranchingParams {
  double b = 1.0;
  double d = 1.0;

  void check() const;  ///< b, d >= 0 and b + d > 0
};

/// P_j[tau_k < tau_0] = ((d/b)^j - 1) / ((d/b)^k - 1); j/k when b = d.
/// Returns 0 for b = 0 (pure death) and j < k.
double bd_hitting_prob(const BranchingParams& p, std::int64_t j, std::int64_t k);

struct LimitWithBound {
  double limit = 0.0;
  double error_bound = 0.0;
};

/// ([b - d]_+ / b, 1/k): the k -> infinity limit of P_1[tau_k < tau_0] and
/// the distance bound to it.
LimitWithBound invasion_prob_limit(const BranchingParams& p, std::int64_t k);

/// E_n[tau_k ^ tau_0] for b != d, 1 <= n <= k.
double expected_absorption_time(const BranchingParams& p, std::int64_t n, std::int64_t k);

/// (1 + ln k) / eps.
double conditioned_time_ratio_bound(double eps, double k);

/// P_n(tau_0 <= t) = ((d - d e^{(d-b)t}) / (b - d e^{(d-b)t}))^n for b != d.
double extinction_time_cdf(const BranchingParams& p, std::int64_t n, double t);

/// G(lambda) = E_1[exp(-lambda int_0^inf Z_t dt)], the smaller root of
/// b G^2 - (b + d + lambda) G + d = 0.
double occupation_laplace(const BranchingParams& p, double lambda);

/// Exit probability P_a[tau_N < tau_0], N = ceil(M eps sigma K), of the
/// chain on N_0 with p(i, i +- 1) = 1/2 -+ (C1 i / K - C2 eps sigma).
double chain_exit_prob(double C1, double C2, double eps, double sigma, std::int64_t K, std::int64_t a,
                       double M);

/// Upper exit level ceil(M eps sigma K) used by chain_exit_prob.
std::int64_t chain_exit_level(double eps, double sigma, std::int64_t K, double M);

/// Probability that the walk with up-probability 1/2 + C sigma started at
/// `start` hits `hi` before `lo`.
double biased_walk_ruin(double C, double sigma, std::int64_t start, std::int64_t lo, std::int64_t hi);

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  std::uint64_t trials = 0;
};

struct BirthDeathMc {
  Estimate hit_hi;
  Estimate absorption_time;
};

/// Simulates the linear birth-death process from n0 until it leaves
/// (lo, hi); reports the hit-hi frequency and the mean absorption time.
BirthDeathMc mc_birth_death(const BranchingParams& p, std::int64_t n0, std::pair<std::int64_t, std::int64_t> absorb,
                            Rng& rng, std::uint64_t trials);

/// Frequency of tau_0 <= t from n.
Estimate mc_extinction_cdf(const BranchingParams& p, std::int64_t n, double t, Rng& rng, std::uint64_t trials);

/// Frequency of hitting hi before lo for the biased walk.
Estimate mc_biased_walk(double C, double sigma, std::int64_t start, std::int64_t lo, std::int64_t hi, Rng& rng,
                        std::uint64_t trials);

/// Binomial estimate from a success count.
Estimate binomial_estimate(std::uint64_t successes, std::uint64_t trials);

}  // namespace eadlab::oracles
