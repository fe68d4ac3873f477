#include "eadlab/tss.hpp"

#include <algorithm>
#include <cmath>

#include "eadlab/analytic.hpp"
#include "eadlab/error.hpp"

namespace eadlab {

double JumpPath::value_at(double t) const {
  if (times.empty()) throw PreconditionError("value_at on an empty path");
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return states.front();
  return states[static_cast<std::size_t>(it - times.begin()) - 1];
}

std::vector<std::pair<int, double>> tss_rates(const ModelSpec& spec, double x, double sigma) {
  const double zbar = equilibrium_mass(spec, x);
  const double base = spec.m(x) * spec.b(x) * zbar;
  const int A = spec.kernel.max_jump();
  const auto w = spec.kernel.weights_at(x);
  std::vector<std::pair<int, double>> out;
  for (int h = -A; h <= A; ++h) {
    if (h == 0) continue;
    const double y = x + sigma * h;
    if (!spec.space.contains(y)) continue;
    const double weight = w[static_cast<std::size_t>(h + A)];
    const double fitness = spec.b(y) - spec.d(y) - spec.c(y, x) * zbar;
    double rate = 0.0;
    if (fitness > 0.0 && weight > 0.0) rate = base * fitness / spec.b(y) * weight;
    out.emplace_back(h, rate);
  }
  return out;
}

JumpPath simulate_tss(const ModelSpec& spec, double x0, double sigma, double T, Rng& rng) {
  if (!spec.space.contains(x0)) throw PreconditionError("simulate_tss: x0 outside the trait space");
  if (!(T >= 0.0)) throw PreconditionError("simulate_tss: T must be >= 0");
  JumpPath path;
  path.sigma = sigma;
  path.horizon = T;
  path.times.push_back(0.0);
  path.states.push_back(x0);
  double t = 0.0;
  double x = x0;
  for (;;) {
    const auto rates = tss_rates(spec, x, sigma);
    double total = 0.0;
    for (const auto& [h, r] : rates) total += r;
    if (!std::isfinite(total)) throw DomainError("simulate_tss: non-finite total jump rate");
    if (!(total > 0.0)) break;  // absorbing
    t += rng.exponential(total);
    if (t > T) break;
    double pick = rng.uniform() * total;
    int h = 0;
    for (const auto& [hh, r] : rates) {
      if (r <= 0.0) continue;
      h = hh;
      if (pick < r) break;
      pick -= r;
    }
    x += sigma * h;
    path.times.push_back(t);
    path.states.push_back(x);
  }
  return path;
}

JumpPath rescaled_tss_path(const JumpPath& path) {
  if (path.empty()) return path;
  if (!(path.sigma > 0.0)) throw PreconditionError("rescaled_tss_path: sigma must be > 0");
  const double s2 = path.sigma * path.sigma;
  JumpPath out = path;
  for (double& t : out.times) t *= s2;
  out.horizon = path.horizon * s2;
  return out;
}

}  // namespace eadlab
