#include "eadlab/analytic.hpp"

#include <algorithm>
#include <cmath>

#include "eadlab/error.hpp"

namespace eadlab {

double equilibrium_mass(const ModelSpec& spec, double x) {
  const double cxx = spec.c(x, x);
  if (!(cxx > 0.0)) throw DomainError("c(x,x) <= 0 at x = " + std::to_string(x));
  return (spec.b(x) - spec.d(x)) / cxx;
}

double invasion_fitness(const ModelSpec& spec, double y, double x) {
  return spec.b(y) - spec.d(y) - spec.c(y, x) * equilibrium_mass(spec, x);
}

double fitness_gradient(const ModelSpec& spec, double x) {
  using expr::Variable;
  const auto& r = spec.rates;
  const double db = r.b.eval_d(x, std::nullopt, Variable::X).deriv;
  const double dd = r.d.eval_d(x, std::nullopt, Variable::X).deriv;
  const double dc = r.c.eval_d(x, x, Variable::X).deriv;
  return db - dd - dc * equilibrium_mass(spec, x);
}

FitnessProfile fitness_profile(const ModelSpec& spec, double x) {
  return {x, equilibrium_mass(spec, x), fitness_gradient(spec, x)};
}

const char* to_string(Coexistence v) {
  switch (v) {
    case Coexistence::Coexist:
      return "coexist";
    case Coexistence::YExcludesX:
      return "y-excludes-x";
    case Coexistence::XExcludesY:
      return "x-excludes-y";
    case Coexistence::Degenerate:
      return "degenerate";
  }
  return "?";
}

Coexistence coexistence_check(const ModelSpec& spec, double x, double y) {
  const double fyx = invasion_fitness(spec, y, x);
  const double fxy = invasion_fitness(spec, x, y);
  if (std::fabs(fyx) <= kCoexistenceTol || std::fabs(fxy) <= kCoexistenceTol)
    return Coexistence::Degenerate;
  if (fyx > 0.0 && fxy > 0.0) return Coexistence::Coexist;
  if (fyx > 0.0 && fxy < 0.0) return Coexistence::YExcludesX;
  if (fxy > 0.0 && fyx < 0.0) return Coexistence::XExcludesY;
  // both negative: neither trait can invade the other; mutual exclusion is
  // bistable and has no winner
  return Coexistence::Degenerate;
}

double cead_rhs(const ModelSpec& spec, double x) {
  const double drive = spec.m(x) * equilibrium_mass(spec, x) * fitness_gradient(spec, x);
  const int A = spec.kernel.max_jump();
  const auto w = spec.kernel.weights_at(x);
  double sum = 0.0;
  for (int h = -A; h <= A; ++h) sum += h * std::max(0.0, h * drive) * w[static_cast<std::size_t>(h + A)];
  return sum;
}

double cead_rhs_symmetric(const ModelSpec& spec, double x) {
  const double drive = spec.m(x) * equilibrium_mass(spec, x) * fitness_gradient(spec, x);
  const int A = spec.kernel.max_jump();
  const auto w = spec.kernel.weights_at(x);
  double second_moment = 0.0;
  for (int h = -A; h <= A; ++h) second_moment += double(h) * h * w[static_cast<std::size_t>(h + A)];
  return 0.5 * second_moment * drive;
}

double invasion_prob_first_order(const ModelSpec& spec, double x, int h) {
  return std::max(0.0, h * fitness_gradient(spec, x)) / spec.b(x);
}

}  // namespace eadlab
