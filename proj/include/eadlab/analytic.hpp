#pragma once

// Closed-form deterministic quantities of the monomorphic and dimorphic
// logistic systems: equilibrium mass, invasion fitness, fitness gradient,
// the canonical-equation drift and first-order invasion probabilities.

#include "eadlab/model.hpp"

namespace eadlab {

/// (b(x) - d(x)) / c(x, x). Throws DomainError if c(x, x) <= 0.
double equilibrium_mass(const ModelSpec& spec, double x);

/// Initial per-capita growth rate of a rare y mutant in an x resident at
/// equilibrium: b(y) - d(y) - c(y, x) zbar(x).
double invasion_fitness(const ModelSpec& spec, double y, double x);

/// d/dy f(y, x) at y = x, by forward-mode differentiation.
double fitness_gradient(const ModelSpec& spec, double x);

struct FitnessProfile {
  double x = 0.0;
  double zbar = 0.0;
  double d1f = 0.0;
};

FitnessProfile fitness_profile(const ModelSpec& spec, double x);

enum class Coexistence { Coexist, YExcludesX, XExcludesY, Degenerate };

const char* to_string(Coexistence v);

inline constexpr double kCoexistenceTol = 1e-10;

/// Classifies LV(2, (x, y)) by the signs of f(x, y) and f(y, x).
Coexistence coexistence_check(const ModelSpec& spec, double x, double y);

/// Right-hand side of the canonical equation,
///   sum_h h [h m(x) zbar(x) d1f(x)]_+ M(x, h),
/// with the unrestricted kernel M.
double cead_rhs(const ModelSpec& spec, double x);

/// Classical symmetric-kernel form 1/2 sum_h h^2 m zbar d1f M(x, h).
double cead_rhs_symmetric(const ModelSpec& spec, double x);

/// [h d1f(x)]_+ / b(x): invasion probability per unit sigma of a mutant at
/// x + sigma h, to first order in sigma.
double invasion_prob_first_order(const ModelSpec& spec, double x, int h);

}  // namespace eadlab
