#pragma once

// Analytic potentials and their closed-form companions: soliton wells,
// Lame potentials, collage periodization, the collage Lyapunov function,
// Lame n=1 Bloch functions and the 2-soliton displacement system.

#include <optional>
#include <string>
#include <utility>

#include "dbands/darboux.hpp"
#include "dbands/potential.hpp"
#include "dbands/specfun.hpp"

namespace dbands::catalog {

/// -2 g0^2 sech^2(g0 x)
PotentialSpec make_one_soliton(double gamma0);
/// Symmetric 2-soliton well, built from the null potential by the Wronskian
/// of cosh(g1 x) and sinh(g2 x); requires 0 < g1 < g2.
PotentialSpec make_two_soliton(double gamma1, double gamma2);
/// n(n+1) m sn^2(x|m), period 2K(m).
PotentialSpec make_lame(int n, double m);
/// Truncate `base` to [-a, a) and tile with period 2a.
PotentialSpec periodize(const PotentialSpec& base, double a);

enum class SolitonSeedFlavor { RealShift, ComplexHalfPeriod };

/// Transformation functions of the 1-soliton well at alpha = -g1^2.
/// RealShift (g1 > g0): cosh g0(x + d) / cosh g0 x e^{-g1 x}, d = artanh(g0/g1)/g0.
/// ComplexHalfPeriod (g1 < g0): sinh g0(x + d) / cosh g0 x e^{-g1 x}, d = artanh(g1/g0)/g0,
/// the real representative of the shift d + i pi / (2 g0).
TransformationFunction soliton1_bloch_seed(double gamma0, double gamma1, SolitonSeedFlavor flavor);
double soliton1_shift(double gamma0, double gamma1, SolitonSeedFlavor flavor);

/// Closed-form discriminant of the periodized 1-soliton well (E = k^2 > 0;
/// E < 0 by k -> i kappa; E = 0 by the k -> 0 limit).
double lyapunov_soliton1_analytic(double E, double a, double gamma0);

struct LameBlochParams {
  int n = 1;
  double m = 0.5;
  specfun::Complex a;
  /// Normalization point; chosen automatically when empty.
  std::optional<double> x0;
};

struct LameBlochPair {
  TransformationFunction u_beta;
  TransformationFunction u_inv;
  specfun::Complex beta;  // multiplier of u_beta
  double alpha;
  double x0;
};

/// Closed-form n=1 Bloch functions sigma(x + a + w')/sigma(x + w') e^{-zeta(a) x},
/// normalized to 1 at x0, and the partner with a -> -a.
LameBlochPair lame_bloch_analytic(const LameBlochParams& p);

/// alpha = (2/3)(m + 1) - P(a)
double lame_alpha_of(specfun::Complex a, const specfun::WeierstrassLattice& lat);
/// a on the gap segment (0 for alpha < E0, 1 for alpha in (1, 1 + m)).
specfun::Complex lame_displacement_for(double alpha, const specfun::WeierstrassLattice& lat);

enum class DisplacementRegion { Omega1, Omega2, Omega3, None };

struct DisplacementSystem {
  double gamma1, gamma2, gamma3, gamma4;
  double Gamma;
  double deltaA;
  double deltaB;
  DisplacementRegion region;
};

DisplacementSystem two_soliton_displacement(double gamma1, double gamma2, double gamma3,
                                            double gamma4);

struct ConsistentDisplacement {
  double gamma3;
  double gamma4;
  double delta;
};

/// Fix gamma3 = seed and solve deltaA(gamma3, gamma4) = deltaB(gamma3, gamma4)
/// for gamma4 inside region Omega2.
ConsistentDisplacement find_consistent_displacement(double gamma1, double gamma2, double seed_gamma3);

/// Transformation functions W(u1,u2,u_k)/W(u1,u2) of the 2-soliton well
/// with u1 = cosh g1 x, u2 = sinh g2 x, u_k = e^{-g_k x}; energy -g_k^2.
TransformationFunction two_soliton_seed(double gamma1, double gamma2, double gammak);

/// e^{-(g3+g4)x} (g3 - g4) Gamma W12(x + delta)/W12(x), returned in scaled form.
ScaledValue two_soliton_displaced_wronskian(double gamma1, double gamma2, double gamma3,
                                            double gamma4, double delta, double x);

/// W(cosh g1 x, sinh g2 x) in scaled form.
ScaledValue two_soliton_w12(double gamma1, double gamma2, double x);

struct CollageTwoSoliton {
  PotentialSpec potential;
  double a;
};

/// Locate the interior minimum a > 0 of the 2-soliton well and periodize on [-a, a).
CollageTwoSoliton collage_two_soliton(double gamma1, double gamma2);

}  // namespace dbands::catalog
