#include "eadlab/ode.hpp"

#include <algorithm>
#include <cmath>

#include "eadlab/analytic.hpp"
#include "eadlab/error.hpp"

namespace eadlab {

const char* to_string(TerminalReason r) {
  switch (r) {
    case TerminalReason::Horizon:
      return "horizon";
    case TerminalReason::Boundary:
      return "boundary";
    case TerminalReason::Blowup:
      return "blowup";
  }
  return "?";
}

double OdeSolution::interpolate(double t, std::size_t i) const {
  if (times.empty()) throw PreconditionError("interpolate on an empty solution");
  if (t <= times.front()) return states.front()[i];
  if (t >= times.back()) return states.back()[i];
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto k = static_cast<std::size_t>(it - times.begin());
  const double t0 = times[k - 1];
  const double t1 = times[k];
  const double w = (t - t0) / (t1 - t0);
  return (1.0 - w) * states[k - 1][i] + w * states[k][i];
}

namespace {

std::size_t step_count(double T, double dt) {
  if (!(dt > 0.0)) throw PreconditionError("dt must be > 0");
  if (!(T >= 0.0)) throw PreconditionError("T must be >= 0");
  // tolerate T/dt landing a hair above an integer
  return static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
}

}  // namespace

OdeSolution integrate_lv(const ModelSpec& spec, const std::vector<double>& traits,
                         const std::vector<double>& z0, double T, double dt) {
  const std::size_t n = traits.size();
  if (n == 0) throw PreconditionError("integrate_lv: need at least one trait");
  if (z0.size() != n) throw PreconditionError("integrate_lv: z0 and traits differ in length");
  for (double z : z0)
    if (!(z >= 0.0)) throw PreconditionError("integrate_lv: z0 must be nonnegative");

  std::vector<double> r(n);
  std::vector<double> c(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = spec.b(traits[i]) - spec.d(traits[i]);
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = spec.c(traits[i], traits[j]);
  }
  auto rhs = [&](const std::vector<double>& z, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) {
      double comp = 0.0;
      for (std::size_t j = 0; j < n; ++j) comp += c[i * n + j] * z[j];
      out[i] = z[i] * (r[i] - comp);
    }
  };

  const std::size_t steps = step_count(T, dt);
  OdeSolution sol;
  sol.times.reserve(steps + 1);
  sol.states.reserve(steps + 1);
  sol.times.push_back(0.0);
  sol.states.push_back(z0);

  std::vector<double> z = z0, k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * dt;
    const double h = std::min(dt, T - t);
    rhs(z, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + 0.5 * h * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + 0.5 * h * k2[i];
    rhs(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + h * k3[i];
    rhs(tmp, k4);
    bool blown = false;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(z[i])) blown = true;
      else if (z[i] < 0.0) {
        if (z[i] > -1e-12) z[i] = 0.0;
        else blown = true;
      }
    }
    if (blown) {
      sol.terminal_reason = TerminalReason::Blowup;
      return sol;
    }
    sol.times.push_back(s + 1 == steps ? T : t + h);
    sol.states.push_back(z);
  }
  return sol;
}

Lv2Equilibrium lv2_equilibrium(const ModelSpec& spec, double x, double y) {
  if (x == y) throw PreconditionError("lv2_equilibrium: traits must differ");
  const double cxx = spec.c(x, x), cxy = spec.c(x, y);
  const double cyx = spec.c(y, x), cyy = spec.c(y, y);
  const double rx = spec.b(x) - spec.d(x);
  const double ry = spec.b(y) - spec.d(y);
  Lv2Equilibrium eq;
  const double det = cxx * cyy - cxy * cyx;
  if (std::fabs(det) < 1e-14) {
    eq.status = Lv2Equilibrium::Status::Degenerate;
    return eq;
  }
  const double z1 = (rx * cyy - cxy * ry) / det;
  const double z2 = (cxx * ry - cyx * rx) / det;
  eq.z = {z1, z2};
  if (!(z1 > 0.0 && z2 > 0.0)) {
    eq.status = Lv2Equilibrium::Status::NoInterior;
    return eq;
  }
  eq.status = Lv2Equilibrium::Status::Interior;
  // Jacobian at an interior equilibrium: J_ij = -z_i c_ij
  const double a = -z1 * cxx, b = -z1 * cxy;
  const double c = -z2 * cyx, d = -z2 * cyy;
  const double tr = a + d;
  const double dt = a * d - b * c;
  const double disc = tr * tr - 4.0 * dt;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    eq.eigen_real = {0.5 * (tr - s), 0.5 * (tr + s)};
  } else {
    eq.eigen_real = {0.5 * tr, 0.5 * tr};
  }
  eq.stable = eq.eigen_real.first < 0.0 && eq.eigen_real.second < 0.0;
  return eq;
}

OdeSolution integrate_cead(const ModelSpec& spec, double x0, double T, double dt) {
  const auto& sp = spec.space;
  if (!sp.contains(x0)) throw PreconditionError("integrate_cead: x0 outside the trait space");
  const std::size_t steps = step_count(T, dt);
  // intermediate RK stages may overshoot; the drift is only defined on X
  auto f = [&](double x) { return cead_rhs(spec, std::clamp(x, sp.lo, sp.hi)); };

  OdeSolution sol;
  sol.times.reserve(steps + 1);
  sol.states.reserve(steps + 1);
  sol.times.push_back(0.0);
  sol.states.push_back({x0});
  double x = x0;
  bool held = false;
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * dt;
    const double h = std::min(dt, T - t);
    if (!held) {
      const double k1 = f(x);
      const double k2 = f(x + 0.5 * h * k1);
      const double k3 = f(x + 0.5 * h * k2);
      const double k4 = f(x + h * k3);
      const double next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (next > sp.hi || next < sp.lo) {
        x = std::clamp(next, sp.lo, sp.hi);
        held = true;
        sol.terminal_reason = TerminalReason::Boundary;
      } else {
        x = next;
      }
    }
    sol.times.push_back(s + 1 == steps ? T : t + h);
    sol.states.push_back({x});
  }
  return sol;
}

}  // namespace eadlab
