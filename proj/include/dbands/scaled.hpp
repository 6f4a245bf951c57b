#pragma once

#include <algorithm>
#include <cmath>

namespace dbands {

/// (psi, psi') = e^{log_scale} (psi, dpsi). Lets Bloch functions and their
/// Wronskians be evaluated far from the origin without overflow.
struct ScaledState {
  double psi = 0.0;
  double dpsi = 0.0;
  double log_scale = 0.0;

  double value() const { return psi * std::exp(log_scale); }
  double derivative() const { return dpsi * std::exp(log_scale); }
};

struct ScaledValue {
  double value = 0.0;
  double log_scale = 0.0;

  double plain() const { return value * std::exp(log_scale); }
  int sign() const { return (value > 0) - (value < 0); }
  /// log |value e^{log_scale}|
  double log_abs() const { return std::log(std::abs(value)) + log_scale; }
};

/// a + c b on a common scale.
inline ScaledState combine(const ScaledState& a, double c, const ScaledState& b) {
  if (c == 0.0) return a;
  const double L = std::max(a.log_scale, b.log_scale);
  const double fa = std::exp(a.log_scale - L), fb = c * std::exp(b.log_scale - L);
  return {a.psi * fa + b.psi * fb, a.dpsi * fa + b.dpsi * fb, L};
}

/// W(u1, u2) = u1 u2' - u1' u2
inline ScaledValue wronskian(const ScaledState& u1, const ScaledState& u2) {
  return {u1.psi * u2.dpsi - u1.dpsi * u2.psi, u1.log_scale + u2.log_scale};
}

}  // namespace dbands
