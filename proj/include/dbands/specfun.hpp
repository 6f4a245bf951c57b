#pragma once

// Jacobi and Weierstrass elliptic functions for the real-modulus lattice
// used by the Lamé potentials: real half-period omega = K(m), imaginary
// half-period omega' = i K'(m).

#include <array>
#include <complex>

namespace dbands::specfun {

using Complex = std::complex<double>;

/// Modulus parameter m, restricted to the open interval (0, 1).
class EllipticParameter {
 public:
  explicit EllipticParameter(double m);
  double value() const noexcept { return m_; }
  double complement() const noexcept { return 1.0 - m_; }

 private:
  double m_;
};

struct QuarterPeriods {
  double K;
  double Kprime;
};

/// Complete elliptic integrals K(m) and K(1-m) by the arithmetic-geometric mean.
QuarterPeriods complete_elliptic(EllipticParameter m);

struct JacobiTriple {
  double sn;
  double cn;
  double dn;
};

/// sn, cn, dn at real argument via the descending AGM ladder.
JacobiTriple jacobi_sn_cn_dn(double x, EllipticParameter m);

/// Weierstrass lattice with half-periods omega = K and omega' = iK', and
/// invariants chosen so that 2 m sn^2(x|m) = 2 (P(x + omega') - e3).
class WeierstrassLattice {
 public:
  explicit WeierstrassLattice(EllipticParameter m);

  double m() const noexcept { return m_; }
  double omega() const noexcept { return omega_; }
  double omega_prime_im() const noexcept { return omega_prime_im_; }
  Complex omega_prime() const noexcept { return {0.0, omega_prime_im_}; }
  /// (e1, e2, e3), e1 > e2 > e3, summing to zero.
  const std::array<double, 3>& roots() const noexcept { return roots_; }
  double nome() const noexcept { return q_; }
  /// zeta(omega)
  double eta() const noexcept { return eta_; }
  /// zeta(omega'), purely imaginary.
  Complex eta_prime() const noexcept { return eta_prime_; }

  // Theta-series building blocks, argument v = pi z / (2 omega).
  Complex theta1(Complex v) const;
  Complex theta1_prime(Complex v) const;
  Complex theta2(Complex v) const;
  double theta1_prime_zero() const noexcept { return theta1p0_; }

 private:
  double m_;
  double omega_;
  double omega_prime_im_;
  std::array<double, 3> roots_;
  double q_;
  int terms_;
  std::array<double, 32> qpow_{};  // q^{(n+1/2)^2}
  double theta1p0_;
  double theta3_0_;
  double theta4_0_;
  double eta_;
  Complex eta_prime_;

  friend Complex weierstrass_p(Complex, const WeierstrassLattice&);
};

Complex weierstrass_p(Complex z, const WeierstrassLattice& lat);
Complex weierstrass_zeta(Complex z, const WeierstrassLattice& lat);
Complex weierstrass_sigma(Complex z, const WeierstrassLattice& lat);

struct SigmaWithDerivative {
  Complex sigma;
  Complex dsigma;
};

/// sigma(z) together with sigma'(z); finite at the zeros of sigma, where
/// sigma'/sigma = zeta is not.
SigmaWithDerivative weierstrass_sigma_d(Complex z, const WeierstrassLattice& lat);

/// Segments of the fundamental cell on which P is real and monotone.
/// Gap 0 is the real segment (0, omega]; gap 1 is omega' + (0, omega].
struct GapSegment {
  int j = 0;
};

/// Solve P(a) = target for a on the requested segment.
Complex invert_p_on_gap_segment(double target, const WeierstrassLattice& lat,
                                GapSegment segment);

/// Pole guard radius for P and zeta.
inline constexpr double kPoleRadius = 1e-10;

}  // namespace dbands::specfun
