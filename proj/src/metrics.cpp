#include "eadlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "eadlab/analytic.hpp"
#include "eadlab/error.hpp"
#include "eadlab/simplex.hpp"

namespace eadlab {

SignedAtomicMeasure::SignedAtomicMeasure(std::vector<std::pair<double, double>> atoms) {
  for (const auto& [x, w] : atoms)
    if (!std::isfinite(x) || !std::isfinite(w)) throw PreconditionError("measure atoms must be finite");
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [x, w] : atoms) {
    if (!atoms_.empty() && atoms_.back().first == x)
      atoms_.back().second += w;
    else
      atoms_.emplace_back(x, w);
  }
  std::erase_if(atoms_, [](const auto& a) { return a.second == 0.0; });
}

SignedAtomicMeasure SignedAtomicMeasure::dirac(double x, double w) { return SignedAtomicMeasure({{x, w}}); }

double SignedAtomicMeasure::total_variation() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += std::fabs(a.second);
  return s;
}

SignedAtomicMeasure SignedAtomicMeasure::operator-() const { return scaled(-1.0); }

SignedAtomicMeasure SignedAtomicMeasure::scaled(double c) const {
  SignedAtomicMeasure r;
  if (c == 0.0) return r;
  r.atoms_ = atoms_;
  for (auto& a : r.atoms_) a.second *= c;
  return r;
}

SignedAtomicMeasure operator+(const SignedAtomicMeasure& a, const SignedAtomicMeasure& b) {
  std::vector<std::pair<double, double>> all = a.atoms_;
  all.insert(all.end(), b.atoms_.begin(), b.atoms_.end());
  return SignedAtomicMeasure(std::move(all));
}

SignedAtomicMeasure operator-(const SignedAtomicMeasure& a, const SignedAtomicMeasure& b) { return a + (-b); }

double kr_norm(const SignedAtomicMeasure& mu) {
  const auto& at = mu.atoms();
  const std::size_t n = at.size();
  if (n == 0) return 0.0;
  if (n == 1) return std::fabs(at[0].second);

  // g = f + 1 in [0, 2] puts the origin inside the feasible set.
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  A.reserve(3 * n - 2);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(n, 0.0);
    row[i] = 1.0;
    A.push_back(std::move(row));
    b.push_back(2.0);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double gap = at[i + 1].first - at[i].first;
    std::vector<double> up(n, 0.0);
    up[i + 1] = 1.0;
    up[i] = -1.0;
    std::vector<double> down(n, 0.0);
    down[i + 1] = -1.0;
    down[i] = 1.0;
    A.push_back(std::move(up));
    b.push_back(gap);
    A.push_back(std::move(down));
    b.push_back(gap);
  }
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = at[i].second;
  const LpResult lp = simplex_max(A, b, c);
  if (lp.status != LpResult::Status::Optimal) throw Error("kr_norm: LP unexpectedly unbounded");
  // evaluate the objective at the clipped optimum to keep round-off out of the constraints
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) value += std::clamp(lp.x[i] - 1.0, -1.0, 1.0) * at[i].second;
  return std::max(0.0, value);
}

double kr_distance(const SignedAtomicMeasure& mu, const SignedAtomicMeasure& nu) { return kr_norm(mu - nu); }

double kr_bruteforce(const SignedAtomicMeasure& mu) {
  const auto& at = mu.atoms();
  const std::size_t n = at.size();
  if (n > kBruteforceMaxAtoms) throw PreconditionError("kr_bruteforce: at most 6 atoms");
  if (n == 0) return 0.0;
  constexpr double delta = 1e-3;
  constexpr int steps = 2000;  // grid -1, -1 + delta, ..., 1
  auto level = [&](int k) { return -1.0 + delta * static_cast<double>(k); };

  // best[k]: largest partial sum over feasible prefixes ending at level k
  std::vector<double> best(steps + 1);
  for (int k = 0; k <= steps; ++k) best[k] = at[0].second * level(k);
  std::vector<double> next(steps + 1);
  for (std::size_t i = 1; i < n; ++i) {
    const double gap = at[i].first - at[i - 1].first;
    const int r = static_cast<int>(std::min<double>(steps, std::floor(gap / delta + 1e-9)));
    // sliding-window maximum of best over [k - r, k + r]
    std::deque<int> window;
    int hi = -1;
    for (int k = 0; k <= steps; ++k) {
      while (hi < std::min(steps, k + r)) {
        ++hi;
        while (!window.empty() && best[window.back()] <= best[hi]) window.pop_back();
        window.push_back(hi);
      }
      while (window.front() < k - r) window.pop_front();
      next[k] = best[window.front()] + at[i].second * level(k);
    }
    best.swap(next);
  }
  return std::max(0.0, *std::max_element(best.begin(), best.end()));
}

SignedAtomicMeasure sample_measure(const Trajectory::Sample& s, std::int64_t K) {
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(s.atoms.size());
  const double inv_K = 1.0 / static_cast<double>(K);
  for (const auto& a : s.atoms) atoms.emplace_back(a.trait, static_cast<double>(a.count) * inv_K);
  return SignedAtomicMeasure(std::move(atoms));
}

std::vector<double> traj_kr_profile(const Trajectory& traj, const OdeSolution& cead, const ModelSpec& spec) {
  if (cead.times.empty()) throw PreconditionError("traj_kr_profile: empty reference path");
  std::vector<double> out;
  out.reserve(traj.samples.size());
  for (const auto& s : traj.samples) {
    const double x = cead.interpolate(s.t);
    const auto ref = SignedAtomicMeasure::dirac(x, equilibrium_mass(spec, x));
    out.push_back(kr_distance(sample_measure(s, traj.K), ref));
  }
  return out;
}

double traj_sup_distance(const Trajectory& traj, const OdeSolution& cead, const ModelSpec& spec) {
  double sup = 0.0;
  for (double v : traj_kr_profile(traj, cead, spec)) sup = std::max(sup, v);
  return sup;
}

}  // namespace eadlab
