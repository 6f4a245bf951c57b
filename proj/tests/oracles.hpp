#pragma once

// Independent reference computations used only by the test suites. None of
// these share code paths with the library routines they check.

#include <cmath>
#include <array>
#include <complex>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

using Complex = std::complex<double>;

/// K(m) by adaptive Gauss-Kronrod quadrature of int_0^{pi/2} dt / sqrt(1 - m sin^2 t).
inline double complete_K_quadrature(double m) {
  auto f = [m](double t) { return 1.0 / std::sqrt(1.0 - m * std::sin(t) * std::sin(t)); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, 0.0, std::numbers::pi / 2, 15, 1e-15);
}

/// E(m) by quadrature of int_0^{pi/2} sqrt(1 - m sin^2 t) dt.
inline double complete_E_quadrature(double m) {
  auto f = [m](double t) { return std::sqrt(1.0 - m * std::sin(t) * std::sin(t)); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, 0.0, std::numbers::pi / 2, 15, 1e-15);
}

struct SnCnDn {
  double sn, cn, dn;
};

/// Descending Landen transformation ladder: reduce m until the small-m
/// expansion applies, then climb back.
inline SnCnDn jacobi_landen(double u, double m) {
  if (m < 1e-12) {
    const double s = std::sin(u), c = std::cos(u);
    const double corr = 0.25 * m * (u - s * c);
    return {s - corr * c, c + corr * s, 1.0 - 0.5 * m * s * s};
  }
  const double sm1 = std::sqrt(1.0 - m);
  const double mu = std::pow((1.0 - sm1) / (1.0 + sm1), 2);
  const double smu = std::sqrt(mu);
  const double v = u / (1.0 + smu);
  const SnCnDn r = jacobi_landen(v, mu);
  const double den = 1.0 + smu * r.sn * r.sn;
  return {(1.0 + smu) * r.sn / den, r.cn * r.dn / den, (1.0 - smu * r.sn * r.sn) / den};
}

/// P(z) for half-periods (omega, i omega_im) by direct lattice summation
/// with rows summed in closed form (sum_j 1/(z - 2 j omega)^2 =
/// (pi / 2 omega)^2 csc^2(pi z / 2 omega)) and |k| <= kmax rows.
inline Complex weierstrass_p_lattice(Complex z, double omega, double omega_im, int kmax = 40) {
  const double c = std::numbers::pi / (2.0 * omega);
  auto csc2 = [c](Complex w) {
    const Complex s = std::sin(c * w);
    return c * c / (s * s);
  };
  const Complex wp(0.0, omega_im);
  Complex sum = csc2(z) - c * c / 3.0;  // k = 0 row, minus sum_{j != 0} 1/(2 j omega)^2
  for (int k = 1; k <= kmax; ++k) {
    for (int sgn : {-1, 1}) {
      const Complex shift = 2.0 * double(sgn * k) * wp;
      sum += csc2(z - shift) - csc2(shift);
    }
  }
  return sum;
}

}  // namespace oracle

namespace oracle {

/// Real solutions of -psi'' - 2 g^2 sech^2(g x) psi = E psi obtained by
/// applying -d/dx + g tanh(g x) to free solutions.
struct Pair {
  double psi, dpsi;
};

/// E = -kappa^2: (g tanh g x - kappa) e^{kappa x}
inline Pair soliton1_bound_side(double g, double kappa, double x) {
  const double t = std::tanh(g * x), s2 = 1.0 - t * t, e = std::exp(kappa * x);
  return {(g * t - kappa) * e, (g * g * s2 + kappa * (g * t - kappa)) * e};
}

/// E = k^2: k sin kx + g tanh(g x) cos kx
inline Pair soliton1_scattering(double g, double k, double x) {
  const double t = std::tanh(g * x), s2 = 1.0 - t * t;
  const double c = std::cos(k * x), s = std::sin(k * x);
  return {k * s + g * t * c, k * k * c + g * g * s2 * c - g * t * k * s};
}

/// Printed csch/coth form of the symmetric 2-soliton well (x != 0).
inline double two_soliton_printed(double g1, double g2, double x) {
  const double sech = 1.0 / std::cosh(g1 * x), csch = 1.0 / std::sinh(g2 * x);
  const double num = 2.0 * (g1 * g1 - g2 * g2) *
                     (g1 * g1 * sech * sech + g2 * g2 * csch * csch);
  const double den = g1 * std::tanh(g1 * x) - g2 / std::tanh(g2 * x);
  return num / (den * den);
}

/// Wronskian of the two bound states of the 2-soliton well, up to a constant.
inline double two_soliton_w12(double g1, double g2, double x) {
  return g2 * std::cosh(g1 * x) * std::cosh(g2 * x) - g1 * std::sinh(g1 * x) * std::sinh(g2 * x);
}

/// D(E) of the 1-soliton well cut to [-a, a] and tiled: trace of
/// M(a) M(-a)^{-1} with M built from two closed-form solutions.
inline double collage_soliton1_D(double g, double a, double E) {
  auto pair = [&](double x) {
    if (E > 0.0) {
      const double k = std::sqrt(E), t = std::tanh(g * x), s2 = 1.0 - t * t;
      const double c = std::cos(k * x), s = std::sin(k * x);
      const Pair f1 = soliton1_scattering(g, k, x);
      const Pair f2{-k * c + g * t * s, k * k * s + g * g * s2 * s + g * t * k * c};
      return std::array<Pair, 2>{f1, f2};
    }
    const double kappa = std::sqrt(-E);
    return std::array<Pair, 2>{soliton1_bound_side(g, kappa, x), soliton1_bound_side(g, -kappa, x)};
  };
  const auto m1 = pair(a), m0 = pair(-a);
  const double det0 = m0[0].psi * m0[1].dpsi - m0[1].psi * m0[0].dpsi;
  // b = M(a) adj(M(-a)) / det0, trace only
  const double tr = m1[0].psi * m0[1].dpsi - m1[1].psi * m0[0].dpsi +
                    (-m1[0].dpsi * m0[1].psi + m1[1].dpsi * m0[0].psi);
  return tr / det0;
}

}  // namespace oracle
