#include "dbands/specfun.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "dbands/errors.hpp"

namespace dbands::specfun {

namespace {

constexpr double kPi = std::numbers::pi;

double agm(double a, double b) {
  for (int i = 0; i < 64 && std::abs(a - b) > 1e-16 * a; ++i) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return 0.5 * (a + b);
}

}  // namespace

EllipticParameter::EllipticParameter(double m) : m_(m) {
  if (!(m > 0.0 && m < 1.0)) {
    std::ostringstream os;
    os << "elliptic parameter m=" << m << " outside (0,1)";
    throw DomainError(os.str());
  }
}

QuarterPeriods complete_elliptic(EllipticParameter m) {
  const double K = kPi / (2.0 * agm(1.0, std::sqrt(m.complement())));
  const double Kp = kPi / (2.0 * agm(1.0, std::sqrt(m.value())));
  return {K, Kp};
}

JacobiTriple jacobi_sn_cn_dn(double x, EllipticParameter mp) {
  const double m = mp.value();
  if (!std::isfinite(x)) throw DomainError("jacobi_sn_cn_dn: non-finite argument");
  // Reduce into [-2K, 2K); sn and cn have period 4K.
  const double K = complete_elliptic(mp).K;
  const double P = 4.0 * K;
  double u = x - P * std::floor((x + 2.0 * K) / P);

  std::array<double, 40> a{}, c{};
  a[0] = 1.0;
  double b = std::sqrt(1.0 - m);
  c[0] = std::sqrt(m);
  int n = 0;
  while (std::abs(c[n]) > 1e-16 && n < 38) {
    a[n + 1] = 0.5 * (a[n] + b);
    c[n + 1] = 0.5 * (a[n] - b);
    b = std::sqrt(a[n] * b);
    ++n;
  }
  double phi = std::ldexp(a[n] * u, n);
  for (int k = n; k > 0; --k) phi = 0.5 * (phi + std::asin(c[k] / a[k] * std::sin(phi)));
  const double sn = std::sin(phi);
  const double cn = std::cos(phi);
  return {sn, cn, std::sqrt(1.0 - m * sn * sn)};
}

WeierstrassLattice::WeierstrassLattice(EllipticParameter mp) : m_(mp.value()) {
  const auto qp = complete_elliptic(mp);
  omega_ = qp.K;
  omega_prime_im_ = qp.Kprime;
  roots_ = {(2.0 - m_) / 3.0, (2.0 * m_ - 1.0) / 3.0, -(1.0 + m_) / 3.0};
  q_ = std::exp(-kPi * qp.Kprime / qp.K);

  // Enough terms that q^{(n+1/2)^2 - (n+1/2)} (worst case on the cell
  // boundary) drops below 1e-18.
  const double lq = std::log(q_);
  terms_ = 1;
  while (terms_ < static_cast<int>(qpow_.size())) {
    const double h = terms_ + 0.5;
    if ((h * h - h) * lq < std::log(1e-18)) break;
    ++terms_;
  }
  ++terms_;
  if (terms_ > static_cast<int>(qpow_.size())) terms_ = static_cast<int>(qpow_.size());
  for (int n = 0; n < terms_; ++n) {
    const double h = n + 0.5;
    qpow_[n] = std::exp(h * h * lq);
  }

  double t1p0 = 0.0, t1ppp0 = 0.0;
  for (int n = 0; n < terms_; ++n) {
    const double s = (n % 2 == 0) ? 1.0 : -1.0;
    const double k = 2.0 * n + 1.0;
    t1p0 += s * qpow_[n] * k;
    t1ppp0 -= s * qpow_[n] * k * k * k;
  }
  theta1p0_ = 2.0 * t1p0;
  const double theta1ppp0 = 2.0 * t1ppp0;

  theta3_0_ = 1.0;
  theta4_0_ = 1.0;
  for (int n = 1; n < 2 * terms_ + 2; ++n) {
    const double qn = std::exp(double(n) * n * lq);
    theta3_0_ += 2.0 * qn;
    theta4_0_ += 2.0 * ((n % 2 == 0) ? qn : -qn);
  }

  eta_ = -(kPi * kPi / (12.0 * omega_)) * theta1ppp0 / theta1p0_;
  // Legendre relation: eta omega' - eta' omega = i pi / 2.
  eta_prime_ = (eta_ * omega_prime() - Complex(0.0, kPi / 2.0)) / omega_;
}

Complex WeierstrassLattice::theta1(Complex v) const {
  Complex s = 0.0;
  for (int n = 0; n < terms_; ++n) {
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    s += sign * qpow_[n] * std::sin((2.0 * n + 1.0) * v);
  }
  return 2.0 * s;
}

Complex WeierstrassLattice::theta1_prime(Complex v) const {
  Complex s = 0.0;
  for (int n = 0; n < terms_; ++n) {
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    s += sign * qpow_[n] * (2.0 * n + 1.0) * std::cos((2.0 * n + 1.0) * v);
  }
  return 2.0 * s;
}

Complex WeierstrassLattice::theta2(Complex v) const {
  Complex s = 0.0;
  for (int n = 0; n < terms_; ++n) s += qpow_[n] * std::cos((2.0 * n + 1.0) * v);
  return 2.0 * s;
}

namespace {

struct Reduced {
  Complex z0;     // representative in the fundamental cell
  long mre = 0;   // z = z0 + 2 mre omega + 2 nim omega'
  long nim = 0;
};

Reduced reduce(Complex z, const WeierstrassLattice& lat) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw DomainError("Weierstrass functions: non-finite argument");
  Reduced r;
  r.nim = std::lround(z.imag() / (2.0 * lat.omega_prime_im()));
  r.mre = std::lround(z.real() / (2.0 * lat.omega()));
  r.z0 = z - 2.0 * double(r.mre) * lat.omega() - 2.0 * double(r.nim) * lat.omega_prime();
  return r;
}

void pole_guard(const Reduced& r, const char* what) {
  if (std::abs(r.z0) < kPoleRadius) {
    std::ostringstream os;
    os << what << ": argument within " << kPoleRadius << " of a lattice point";
    throw PoleError(os.str());
  }
}

// Quasi-periodicity data for z = z0 + 2 Omega, Omega = m omega + n omega'.
struct Shift {
  Complex Omega;
  Complex H;  // m eta + n eta'
  double sign;
};

Shift shift_of(const Reduced& r, const WeierstrassLattice& lat) {
  Shift s;
  s.Omega = double(r.mre) * lat.omega() + double(r.nim) * lat.omega_prime();
  s.H = double(r.mre) * lat.eta() + double(r.nim) * lat.eta_prime();
  const long parity = r.mre + r.nim + r.mre * r.nim;
  s.sign = (parity % 2 == 0) ? 1.0 : -1.0;
  return s;
}

}  // namespace

Complex weierstrass_p(Complex z, const WeierstrassLattice& lat) {
  const Reduced r = reduce(z, lat);
  pole_guard(r, "weierstrass_p");
  const Complex v = kPi * r.z0 / (2.0 * lat.omega());
  const Complex f =
      kPi * lat.theta3_0_ * lat.theta4_0_ * lat.theta2(v) / (2.0 * lat.omega() * lat.theta1(v));
  return lat.roots()[0] + f * f;
}

Complex weierstrass_zeta(Complex z, const WeierstrassLattice& lat) {
  const Reduced r = reduce(z, lat);
  pole_guard(r, "weierstrass_zeta");
  const Complex v = kPi * r.z0 / (2.0 * lat.omega());
  const Complex z0val = lat.eta() * r.z0 / lat.omega() +
                        (kPi / (2.0 * lat.omega())) * lat.theta1_prime(v) / lat.theta1(v);
  return z0val + 2.0 * shift_of(r, lat).H;
}

SigmaWithDerivative weierstrass_sigma_d(Complex z, const WeierstrassLattice& lat) {
  const Reduced r = reduce(z, lat);
  const double w = lat.omega();
  const Complex v = kPi * r.z0 / (2.0 * w);
  const Complex g = std::exp(lat.eta() * r.z0 * r.z0 / (2.0 * w));
  const Complex scale = (2.0 * w / kPi) / lat.theta1_prime_zero();
  const Complex t1 = lat.theta1(v);
  const Complex s0 = scale * g * t1;
  const Complex ds0 =
      scale * g * (lat.eta() * r.z0 / w * t1 + (kPi / (2.0 * w)) * lat.theta1_prime(v));
  if (r.mre == 0 && r.nim == 0) return {s0, ds0};
  const Shift s = shift_of(r, lat);
  const Complex factor = s.sign * std::exp(2.0 * s.H * (r.z0 + s.Omega));
  return {factor * s0, factor * (ds0 + 2.0 * s.H * s0)};
}

Complex weierstrass_sigma(Complex z, const WeierstrassLattice& lat) {
  return weierstrass_sigma_d(z, lat).sigma;
}

Complex invert_p_on_gap_segment(double target, const WeierstrassLattice& lat,
                                GapSegment segment) {
  const auto& e = lat.roots();
  const double w = lat.omega();
  if (!std::isfinite(target)) throw RangeError("invert_p_on_gap_segment: non-finite target");

  if (segment.j == 0) {
    // P(t) decreases from +inf to e1 on (0, omega].
    if (target < e[0]) {
      std::ostringstream os;
      os << "target " << target << " below e1=" << e[0] << " on the real segment";
      throw RangeError(os.str());
    }
    if (target == e[0]) return {w, 0.0};
    // P(t) ~ 1/t^2 near zero.
    double lo = std::min(0.5 / std::sqrt(target), 0.5 * w);
    while (weierstrass_p(lo, lat).real() < target) {
      lo *= 0.5;
      if (lo < 1e-9) throw RangeError("invert_p_on_gap_segment: target too large");
    }
    auto f = [&](double t) { return weierstrass_p(t, lat).real() - target; };
    boost::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        f, lo, w, f(lo), e[0] - target,
        boost::math::tools::eps_tolerance<double>(52), iters);
    return {0.5 * (a + b), 0.0};
  }
  if (segment.j == 1) {
    // P(omega' + t) increases from e3 to e2 on [0, omega].
    if (target < e[2] || target > e[1]) {
      std::ostringstream os;
      os << "target " << target << " outside [e3, e2] = [" << e[2] << ", " << e[1] << "]";
      throw RangeError(os.str());
    }
    const Complex wp = lat.omega_prime();
    if (target == e[2]) return wp;
    if (target == e[1]) return wp + w;
    auto f = [&](double t) { return weierstrass_p(wp + t, lat).real() - target; };
    boost::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        f, 0.0, w, e[2] - target, e[1] - target,
        boost::math::tools::eps_tolerance<double>(52), iters);
    return wp + 0.5 * (a + b);
  }
  throw RangeError("invert_p_on_gap_segment: only gap segments 0 and 1 exist for this lattice");
}

}  // namespace dbands::specfun
