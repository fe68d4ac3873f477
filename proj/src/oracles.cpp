#include "eadlab/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "eadlab/error.hpp"

namespace eadlab::oracles {

namespace {

constexpr double kCriticalTol = 1e-12;

// (r^j - 1) / (r^k - 1) with r = exp(log_r), arranged so that neither
// power is formed when it could overflow.
double ruin_ratio(double log_r, double j, double k) {
  if (log_r < 0.0) return std::expm1(j * log_r) / std::expm1(k * log_r);
  return std::exp((j - k) * log_r) * (std::expm1(-j * log_r) / std::expm1(-k * log_r));
}

double log_ratio(double b, double d) { return std::log1p((d - b) / b); }

double log_sum_exp(const std::vector<double>& v, std::size_t count) {
  const double mx = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(count));
  double s = 0.0;
  for (std::size_t i = 0; i < count; ++i) s += std::exp(v[i] - mx);
  return mx + std::log(s);
}

Estimate mean_estimate(double sum, double sum_sq, std::uint64_t n) {
  Estimate e;
  e.trials = n;
  if (n == 0) return e;
  const double dn = static_cast<double>(n);
  e.mean = sum / dn;
  if (n > 1) {
    const double var = std::max(0.0, (sum_sq - dn * e.mean * e.mean) / (dn - 1.0));
    e.se = std::sqrt(var / dn);
  }
  return e;
}

}  // namespace

void BranchingParams::check() const {
  if (!(b >= 0.0 && d >= 0.0 && b + d > 0.0))
    throw PreconditionError("branching parameters need b, d >= 0 and b + d > 0");
}

double bd_hitting_prob(const BranchingParams& p, std::int64_t j, std::int64_t k) {
  p.check();
  if (k < 1) throw PreconditionError("bd_hitting_prob: k must be >= 1");
  if (j < 0 || j > k) throw PreconditionError("bd_hitting_prob: need 0 <= j <= k");
  if (j == k) return 1.0;
  if (j == 0) return 0.0;
  if (p.b == 0.0) return 0.0;
  if (std::fabs(p.d / p.b - 1.0) < kCriticalTol) return static_cast<double>(j) / static_cast<double>(k);
  return ruin_ratio(log_ratio(p.b, p.d), static_cast<double>(j), static_cast<double>(k));
}

LimitWithBound invasion_prob_limit(const BranchingParams& p, std::int64_t k) {
  p.check();
  if (!(p.b > 0.0)) throw PreconditionError("invasion_prob_limit: b must be > 0");
  if (k < 1) throw PreconditionError("invasion_prob_limit: k must be >= 1");
  return {std::max(0.0, p.b - p.d) / p.b, 1.0 / static_cast<double>(k)};
}

double expected_absorption_time(const BranchingParams& p, std::int64_t n, std::int64_t k) {
  p.check();
  if (!(p.b > 0.0)) throw PreconditionError("expected_absorption_time: b must be > 0");
  if (n < 1 || n > k) throw PreconditionError("expected_absorption_time: need 1 <= n <= k");
  if (std::fabs(p.d / p.b - 1.0) < kCriticalTol)
    throw PreconditionError("expected_absorption_time: the critical case b = d is not supported");
  const double lr = log_ratio(p.b, p.d);
  const double dk = static_cast<double>(k);
  const double dn = static_cast<double>(n);
  double sum = 0.0;
  if (lr < 0.0) {
    const double one_minus_rn = -std::expm1(dn * lr);
    double first = 0.0;
    for (std::int64_t j = 1; j <= k; ++j)
      first += ruin_ratio(lr, dk - static_cast<double>(j), dk) / static_cast<double>(j);
    double second = 0.0;
    for (std::int64_t j = 1; j <= n; ++j)
      second += std::expm1((dn - static_cast<double>(j)) * lr) / static_cast<double>(j);
    sum = first * one_minus_rn + second;
  } else {
    // Subcritical: both sums grow like (d/b)^n and cancel. In powers of
    // s = b/d < 1 the same quantity is
    //   -(1-s^{k-n})/(1-s^k) sum_{j<=n} (1-s^j)/j
    //   -(1-s^n)/(1-s^k) sum_{j>n} s^{j-n} (1-s^{k-j})/j.
    const double ls = -lr;
    const double one_minus_sk = -std::expm1(dk * ls);
    double low = 0.0;
    for (std::int64_t j = 1; j <= n; ++j) low += -std::expm1(static_cast<double>(j) * ls) / static_cast<double>(j);
    double high = 0.0;
    for (std::int64_t j = n + 1; j <= k; ++j) {
      const double dj = static_cast<double>(j);
      high += std::exp((dj - dn) * ls) * (-std::expm1((dk - dj) * ls)) / dj;
    }
    sum = -(-std::expm1((dk - dn) * ls) / one_minus_sk) * low - (-std::expm1(dn * ls) / one_minus_sk) * high;
  }
  const double e = sum / (p.b - p.d);
  if (n == 1) {
    const double bound = (1.0 + std::log(dk)) / p.b;
    if (e > bound * (1.0 + 1e-9))
      throw Error("expected_absorption_time: e_1 = " + std::to_string(e) + " exceeds (1 + ln k)/b");
  }
  return e;
}

double conditioned_time_ratio_bound(double eps, double k) {
  if (!(eps > 0.0)) throw PreconditionError("conditioned_time_ratio_bound: eps must be > 0");
  if (!(k >= 1.0)) throw PreconditionError("conditioned_time_ratio_bound: k must be >= 1");
  return (1.0 + std::log(k)) / eps;
}

double extinction_time_cdf(const BranchingParams& p, std::int64_t n, double t) {
  p.check();
  if (n < 1) throw PreconditionError("extinction_time_cdf: n must be >= 1");
  if (!(t >= 0.0)) throw PreconditionError("extinction_time_cdf: t must be >= 0");
  if (p.b > 0.0 && std::fabs(p.d / p.b - 1.0) < kCriticalTol)
    throw PreconditionError("extinction_time_cdf: the critical case b = d is not supported");
  if (p.d == 0.0) return 0.0;
  double q = 0.0;
  if (p.d > p.b) {
    // divide through by e^{(d-b)t} so nothing overflows as t grows
    const double F = std::exp((p.b - p.d) * t);
    q = p.d * (-std::expm1((p.b - p.d) * t)) / (p.d - p.b * F);
  } else {
    const double E = std::exp((p.d - p.b) * t);
    q = p.d * (-std::expm1((p.d - p.b) * t)) / (p.b - p.d * E);
  }
  q = std::clamp(q, 0.0, 1.0);
  if (q == 0.0) return 0.0;
  return std::exp(static_cast<double>(n) * std::log(q));
}

double occupation_laplace(const BranchingParams& p, double lambda) {
  p.check();
  if (!(p.b > 0.0)) throw PreconditionError("occupation_laplace: b must be > 0");
  if (!(lambda >= 0.0)) throw PreconditionError("occupation_laplace: lambda must be >= 0");
  const double s = p.b + p.d + lambda;
  // s^2 - 4bd written without cancellation
  const double disc = (p.b - p.d) * (p.b - p.d) + lambda * (lambda + 2.0 * (p.b + p.d));
  // smaller root via the conjugate form 2d / (s + sqrt(disc))
  return 2.0 * p.d / (s + std::sqrt(disc));
}

std::int64_t chain_exit_level(double eps, double sigma, std::int64_t K, double M) {
  const double level = M * eps * sigma * static_cast<double>(K);
  // products like 0.2 * 200 land a few ulps above an integer
  return static_cast<std::int64_t>(std::ceil(level * (1.0 - 1e-12)));
}

double chain_exit_prob(double C1, double C2, double eps, double sigma, std::int64_t K, std::int64_t a,
                       double M) {
  if (K < 1) throw PreconditionError("chain_exit_prob: K must be >= 1");
  const std::int64_t N = chain_exit_level(eps, sigma, K, M);
  if (!(a > 0 && a < N)) throw PreconditionError("chain_exit_prob: need 0 < a < ceil(M eps sigma K)");
  const double dK = static_cast<double>(K);
  // log of prod_{j<i} p(j, j-1) / p(j, j+1), i = 1..N
  std::vector<double> log_terms(static_cast<std::size_t>(N));
  double acc = 0.0;
  for (std::int64_t i = 1; i <= N; ++i) {
    const double drift = C1 * static_cast<double>(i) / dK - C2 * eps * sigma;
    const double up = 0.5 - drift;
    const double down = 0.5 + drift;
    if (!(up > 0.0 && up < 1.0 && down > 0.0 && down < 1.0))
      throw PreconditionError("chain_exit_prob: transition probability outside (0,1) at i = " +
                              std::to_string(i));
    log_terms[static_cast<std::size_t>(i - 1)] = acc;
    acc += std::log(down) - std::log(up);
  }
  return std::exp(log_sum_exp(log_terms, static_cast<std::size_t>(a)) -
                  log_sum_exp(log_terms, static_cast<std::size_t>(N)));
}

double biased_walk_ruin(double C, double sigma, std::int64_t start, std::int64_t lo, std::int64_t hi) {
  if (!(lo < hi)) throw PreconditionError("biased_walk_ruin: need lo < hi");
  if (start < lo || start > hi) throw PreconditionError("biased_walk_ruin: start outside [lo, hi]");
  if (!(std::fabs(C * sigma) < 0.5)) throw PreconditionError("biased_walk_ruin: need |C sigma| < 1/2");
  if (start == hi) return 1.0;
  if (start == lo) return 0.0;
  const double j = static_cast<double>(start - lo);
  const double k = static_cast<double>(hi - lo);
  const double p = 0.5 + C * sigma;
  const double q = 0.5 - C * sigma;
  if (std::fabs(q / p - 1.0) < kCriticalTol) return j / k;
  return ruin_ratio(std::log(q) - std::log(p), j, k);
}

Estimate binomial_estimate(std::uint64_t successes, std::uint64_t trials) {
  Estimate e;
  e.trials = trials;
  if (trials == 0) return e;
  const double n = static_cast<double>(trials);
  e.mean = static_cast<double>(successes) / n;
  e.se = std::sqrt(e.mean * (1.0 - e.mean) / n);
  return e;
}

BirthDeathMc mc_birth_death(const BranchingParams& p, std::int64_t n0, std::pair<std::int64_t, std::int64_t> absorb,
                            Rng& rng, std::uint64_t trials) {
  p.check();
  if (trials < 1) throw PreconditionError("mc_birth_death: trials must be >= 1");
  const auto [lo, hi] = absorb;
  if (!(lo < hi)) throw PreconditionError("mc_birth_death: need lo < hi");
  const double up = p.b / (p.b + p.d);
  std::uint64_t hits = 0;
  double t_sum = 0.0, t_sq = 0.0;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    std::int64_t n = n0;
    double t = 0.0;
    while (n > lo && n < hi && n > 0) {
      t += rng.exponential(static_cast<double>(n) * (p.b + p.d));
      n += rng.uniform() < up ? 1 : -1;
    }
    if (n >= hi) ++hits;
    t_sum += t;
    t_sq += t * t;
  }
  return {binomial_estimate(hits, trials), mean_estimate(t_sum, t_sq, trials)};
}

Estimate mc_extinction_cdf(const BranchingParams& p, std::int64_t n, double t, Rng& rng, std::uint64_t trials) {
  p.check();
  if (trials < 1) throw PreconditionError("mc_extinction_cdf: trials must be >= 1");
  const double up = p.b / (p.b + p.d);
  std::uint64_t extinct = 0;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    std::int64_t k = n;
    double clock = 0.0;
    while (k > 0) {
      clock += rng.exponential(static_cast<double>(k) * (p.b + p.d));
      if (clock > t) break;
      k += rng.uniform() < up ? 1 : -1;
    }
    if (k == 0) ++extinct;
  }
  return binomial_estimate(extinct, trials);
}

Estimate mc_biased_walk(double C, double sigma, std::int64_t start, std::int64_t lo, std::int64_t hi, Rng& rng,
                        std::uint64_t trials) {
  if (trials < 1) throw PreconditionError("mc_biased_walk: trials must be >= 1");
  const double p = 0.5 + C * sigma;
  std::uint64_t hits = 0;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    std::int64_t s = start;
    while (s > lo && s < hi) s += rng.uniform() < p ? 1 : -1;
    if (s >= hi) ++hits;
  }
  return binomial_estimate(hits, trials);
}

}  // namespace eadlab::oracles
