#pragma once

// Fixed-step RK4 integrators for the competitive Lotka-Volterra system LV(n)
// and for the canonical equation, plus the LV(2) interior equilibrium.

#include <optional>
#include <utility>
#include <vector>

#include "eadlab/model.hpp"

namespace eadlab {

enum class TerminalReason { Horizon, Boundary, Blowup };

const char* to_string(TerminalReason r);

struct OdeSolution {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  TerminalReason terminal_reason = TerminalReason::Horizon;

  const std::vector<double>& final_state() const { return states.back(); }
  /// Linear interpolation of component `i` at time t (clamped to the range).
  double interpolate(double t, std::size_t i = 0) const;
};

/// dz_i/dt = z_i (b(x_i) - d(x_i) - sum_j c(x_i, x_j) z_j).
/// A component pushed below zero by less than 1e-12 is clamped to 0; any
/// larger negative value or non-finite state ends the run with Blowup.
OdeSolution integrate_lv(const ModelSpec& spec, const std::vector<double>& traits,
                         const std::vector<double>& z0, double T, double dt);

struct Lv2Equilibrium {
  enum class Status { Interior, NoInterior, Degenerate };

  Status status = Status::NoInterior;
  std::pair<double, double> z{0.0, 0.0};  ///< solution of the 2x2 system, even when not interior
  bool stable = false;
  std::pair<double, double> eigen_real{0.0, 0.0};

  bool interior() const { return status == Status::Interior; }
};

Lv2Equilibrium lv2_equilibrium(const ModelSpec& spec, double x, double y);

/// RK4 on dx/dt = cead_rhs(x). A step that would leave [lo, hi] is clamped
/// to the boundary and the state is held there for the rest of the horizon.
OdeSolution integrate_cead(const ModelSpec& spec, double x0, double T, double dt);

}  // namespace eadlab
