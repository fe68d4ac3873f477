#pragma once

#include <cmath>

namespace eadlab::expr {

/// Forward-mode dual number: a value and its derivative with respect to one
/// seeded input.
struct Dual {
  double value = 0.0;
  double deriv = 0.0;

  constexpr Dual() = default;
  constexpr explicit Dual(double v, double d = 0.0) : value(v), deriv(d) {}

  static constexpr Dual constant(double v) { return Dual(v); }
  static constexpr Dual seed(double v) { return Dual(v, 1.0); }
};

constexpr Dual operator-(Dual a) { return Dual(-a.value, -a.deriv); }
constexpr Dual operator+(Dual a, Dual b) { return Dual(a.value + b.value, a.deriv + b.deriv); }
constexpr Dual operator-(Dual a, Dual b) { return Dual(a.value - b.value, a.deriv - b.deriv); }
constexpr Dual operator*(Dual a, Dual b) {
  return Dual(a.value * b.value, a.deriv * b.value + a.value * b.deriv);
}
constexpr Dual operator/(Dual a, Dual b) {
  return Dual(a.value / b.value, (a.deriv * b.value - a.value * b.deriv) / (b.value * b.value));
}

inline Dual exp(Dual a) {
  const double e = std::exp(a.value);
  return Dual(e, e * a.deriv);
}
inline Dual log(Dual a) { return Dual(std::log(a.value), a.deriv / a.value); }
inline Dual sin(Dual a) { return Dual(std::sin(a.value), std::cos(a.value) * a.deriv); }
inline Dual cos(Dual a) { return Dual(std::cos(a.value), -std::sin(a.value) * a.deriv); }
inline Dual sqrt(Dual a) {
  const double s = std::sqrt(a.value);
  return Dual(s, a.deriv / (2.0 * s));
}

// d(u^v) = v u^(v-1) u' + u^v ln(u) v'. Each term is only formed when its
// seed derivative is nonzero so that constant exponents of negative or zero
// bases stay well defined.
inline Dual pow(Dual a, Dual b) {
  const double p = std::pow(a.value, b.value);
  double d = 0.0;
  if (a.deriv != 0.0) d += b.value * std::pow(a.value, b.value - 1.0) * a.deriv;
  if (b.deriv != 0.0) d += p * std::log(a.value) * b.deriv;
  return Dual(p, d);
}

}  // namespace eadlab::expr
