#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "dbands/errors.hpp"
#include "dbands/specfun.hpp"
#include "oracles.hpp"

using namespace dbands;
using namespace dbands::specfun;

TEST_CASE("complete_elliptic: symmetry, limit, quadrature oracle") {
  const auto q = complete_elliptic(EllipticParameter(0.5));
  CHECK(std::abs(q.K - q.Kprime) < 1e-13);
  CHECK(std::abs(complete_elliptic(EllipticParameter(1e-14)).K - std::numbers::pi / 2) < 1e-12);
  CHECK(std::abs(q.K - 1.85407467730137) < 1e-13);
  CHECK(std::abs(q.K - oracle::complete_K_quadrature(0.5)) < 1e-14 * q.K);
  for (double m : {0.01, 0.2, 0.7, 0.99}) {
    const double K = complete_elliptic(EllipticParameter(m)).K;
    CHECK(std::abs(K - oracle::complete_K_quadrature(m)) < 1e-14 * K);
  }
  double prev = 0.0;
  for (double m = 0.02; m < 1.0; m += 0.05) {
    const double K = complete_elliptic(EllipticParameter(m)).K;
    CHECK(K > prev);
    prev = K;
  }
  CHECK_THROWS_AS(EllipticParameter(0.0), DomainError);
  CHECK_THROWS_AS(EllipticParameter(1.0), DomainError);
  CHECK_THROWS_AS(EllipticParameter(-0.2), DomainError);
}

TEST_CASE("jacobi_sn_cn_dn: special values and Landen oracle") {
  const EllipticParameter m(0.5);
  const double K = complete_elliptic(m).K;
  auto z = jacobi_sn_cn_dn(0.0, m);
  CHECK(z.sn == 0.0);
  CHECK(z.cn == 1.0);
  CHECK(z.dn == 1.0);
  auto k = jacobi_sn_cn_dn(K, m);
  CHECK(std::abs(k.sn - 1.0) < 1e-14);
  CHECK(std::abs(k.cn) < 1e-14);
  CHECK(std::abs(k.dn - std::sqrt(0.5)) < 1e-14);

  const auto o = oracle::jacobi_landen(0.7, 0.5);
  const auto j = jacobi_sn_cn_dn(0.7, m);
  CHECK(std::abs(j.sn - o.sn) < 1e-12);
  CHECK(std::abs(j.cn - o.cn) < 1e-12);
  CHECK(std::abs(j.dn - o.dn) < 1e-12);
  for (double mm : {0.05, 0.3, 0.9, 0.99}) {
    for (double x : {-3.1, 0.25, 1.9, 4.4}) {
      const auto a = jacobi_sn_cn_dn(x, EllipticParameter(mm));
      const auto b = oracle::jacobi_landen(x, mm);
      CHECK(std::abs(a.sn - b.sn) < 1e-12);
      CHECK(std::abs(a.cn - b.cn) < 1e-12);
      CHECK(std::abs(a.dn - b.dn) < 1e-12);
    }
  }
  CHECK_THROWS_AS(jacobi_sn_cn_dn(1.0, EllipticParameter(1.2)), DomainError);
}

TEST_CASE("jacobi identities and periodicity over random arguments") {
  std::mt19937_64 rng(7);
  for (double mm : {0.1, 0.5, 0.95}) {
    const EllipticParameter m(mm);
    const double K = complete_elliptic(m).K;
    std::uniform_real_distribution<double> ux(-5 * K, 5 * K);
    for (int i = 0; i < 1000; ++i) {
      const double x = ux(rng);
      const auto t = jacobi_sn_cn_dn(x, m);
      CHECK(std::abs(t.sn * t.sn + t.cn * t.cn - 1.0) < 1e-12);
      CHECK(std::abs(t.dn * t.dn + mm * t.sn * t.sn - 1.0) < 1e-12);
      if (i % 50 == 0) {
        CHECK(std::abs(jacobi_sn_cn_dn(x + 2 * K, m).sn + t.sn) < 1e-12);
        CHECK(std::abs(jacobi_sn_cn_dn(x + 4 * K, m).sn - t.sn) < 1e-12);
      }
    }
  }
}

TEST_CASE("Weierstrass lattice: roots, half-period values, Lame calibration") {
  for (double mm : {0.1, 0.5, 0.9}) {
    const WeierstrassLattice lat{EllipticParameter(mm)};
    const auto& e = lat.roots();
    CHECK(std::abs(e[0] + e[1] + e[2]) < 1e-15);
    CHECK(e[0] > e[1]);
    CHECK(e[1] > e[2]);
    const Complex w = lat.omega(), wp = lat.omega_prime();
    CHECK(std::abs(weierstrass_p(w, lat) - e[0]) < 1e-12);
    CHECK(std::abs(weierstrass_p(w + wp, lat) - e[1]) < 1e-12);
    CHECK(std::abs(weierstrass_p(wp, lat) - e[2]) < 1e-12);
    // m sn^2(x|m) = P(x + omega') - e3
    for (double x : {0.1, 0.8, 1.7, 3.3, -2.2}) {
      const double sn = jacobi_sn_cn_dn(x, EllipticParameter(mm)).sn;
      CHECK(std::abs(weierstrass_p(x + wp, lat).real() - e[2] - mm * sn * sn) < 1e-12);
      CHECK(std::abs(weierstrass_p(x + wp, lat).imag()) < 1e-12);
    }
  }
}

TEST_CASE("Weierstrass P against direct lattice summation") {
  const WeierstrassLattice lat{EllipticParameter(0.5)};
  const Complex z(0.3, 0.2);
  const Complex ref = oracle::weierstrass_p_lattice(z, lat.omega(), lat.omega_prime_im());
  CHECK(std::abs(weierstrass_p(z, lat) - ref) < 1e-9);
  for (Complex zz : {Complex(1.3, -0.7), Complex(-2.9, 1.4), Complex(5.0, 2.5)}) {
    const Complex r = oracle::weierstrass_p_lattice(zz, lat.omega(), lat.omega_prime_im());
    CHECK(std::abs(weierstrass_p(zz, lat) - r) < 1e-9 * (1.0 + std::abs(r)));
  }
}

TEST_CASE("sigma, zeta: Laurent limit, parity, quasi-periodicity, zeta' = -P") {
  const WeierstrassLattice lat{EllipticParameter(0.5)};
  const Complex w = lat.omega(), wp = lat.omega_prime();
  for (double ang : {0.0, 0.9, 2.1, 4.0}) {
    const Complex z = 1e-4 * std::polar(1.0, ang);
    CHECK(std::abs(weierstrass_sigma(z, lat) / z - 1.0) < 1e-7);
  }
  // zeta(omega) against the Jacobi form E(m) - (2 - m) K / 3.
  const double E = oracle::complete_E_quadrature(0.5);
  CHECK(std::abs(lat.eta() - (E - (2.0 - 0.5) / 3.0 * lat.omega())) < 1e-13);
  CHECK(std::abs(weierstrass_zeta(w, lat) - lat.eta()) < 1e-12);
  CHECK(std::abs(weierstrass_zeta(wp, lat) - lat.eta_prime()) < 1e-12);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ur(-4.0, 4.0), ui(-2.5, 2.5);
  for (int i = 0; i < 100; ++i) {
    const Complex z(ur(rng), ui(rng));
    const Complex s = weierstrass_sigma(z, lat);
    const Complex s2 = weierstrass_sigma(z + 2.0 * w, lat);
    const Complex expect = -s * std::exp(2.0 * lat.eta() * (z + w));
    CHECK(std::abs(s2 - expect) < 1e-9 * std::abs(expect));
    const Complex s3 = weierstrass_sigma(z + 2.0 * wp, lat);
    const Complex expect3 = -s * std::exp(2.0 * lat.eta_prime() * (z + wp));
    CHECK(std::abs(s3 - expect3) < 1e-9 * std::abs(expect3));
    CHECK(std::abs(weierstrass_sigma(-z, lat) + s) < 1e-12 * (1.0 + std::abs(s)));

    const Complex zeta = weierstrass_zeta(z, lat);
    CHECK(std::abs(weierstrass_zeta(-z, lat) + zeta) < 1e-10 * (1.0 + std::abs(zeta)));
    CHECK(std::abs(weierstrass_zeta(z + 2.0 * w, lat) - zeta - 2.0 * lat.eta()) <
          1e-10 * (1.0 + std::abs(zeta)));

    const Complex p = weierstrass_p(z, lat);
    CHECK(std::abs(weierstrass_p(-z, lat) - p) < 1e-10 * (1.0 + std::abs(p)));
    CHECK(std::abs(weierstrass_p(z + 2.0 * w, lat) - p) < 1e-10 * (1.0 + std::abs(p)));
    CHECK(std::abs(weierstrass_p(z + 2.0 * wp, lat) - p) < 1e-10 * (1.0 + std::abs(p)));

    if (std::abs(p) < 1e4) {
      const double h = 1e-3;
      const Complex d = (-weierstrass_zeta(z + 2 * h, lat) + 8.0 * weierstrass_zeta(z + h, lat) -
                         8.0 * weierstrass_zeta(z - h, lat) + weierstrass_zeta(z - 2 * h, lat)) /
                        (12.0 * h);
      CHECK(std::abs(d + p) < 1e-6 * std::abs(p));
    }
    const auto sd = weierstrass_sigma_d(z, lat);
    CHECK(std::abs(sd.dsigma - sd.sigma * zeta) < 1e-9 * (1.0 + std::abs(sd.dsigma)));
  }
  // Legendre relation
  CHECK(std::abs(lat.eta() * wp - lat.eta_prime() * w - Complex(0, std::numbers::pi / 2)) < 1e-13);
}

TEST_CASE("poles are guarded for P and zeta but not sigma") {
  const WeierstrassLattice lat{EllipticParameter(0.5)};
  const Complex w = lat.omega(), wp = lat.omega_prime();
  CHECK_THROWS_AS(weierstrass_p(0.0, lat), PoleError);
  CHECK_THROWS_AS(weierstrass_zeta(2.0 * w + 2.0 * wp + 1e-12, lat), PoleError);
  CHECK(std::abs(weierstrass_sigma(2.0 * w, lat)) < 1e-12);
  CHECK_NOTHROW(weierstrass_p(1e-8, lat));
}

TEST_CASE("invert_p_on_gap_segment") {
  const WeierstrassLattice lat{EllipticParameter(0.5)};
  const auto& e = lat.roots();
  const Complex w = lat.omega(), wp = lat.omega_prime();
  CHECK(std::abs(invert_p_on_gap_segment(e[0], lat, {0}) - w) < 1e-14);
  CHECK(std::abs(invert_p_on_gap_segment(e[2], lat, {1}) - wp) < 1e-14);
  CHECK(std::abs(invert_p_on_gap_segment(e[1], lat, {1}) - (w + wp)) < 1e-14);

  const double m = 0.5;
  for (double alpha : {1.1, 1.2, 1.3, 1.4}) {
    const double target = 2.0 / 3.0 * (m + 1.0) - alpha;
    const Complex a = invert_p_on_gap_segment(target, lat, {1});
    CHECK(std::abs(a.imag() - lat.omega_prime_im()) < 1e-14);
    CHECK(a.real() > 0.0);
    CHECK(a.real() <= lat.omega());
    CHECK(std::abs(weierstrass_p(a, lat) - target) < 1e-10);
  }
  for (double alpha : {0.35, 0.2, -3.0}) {
    const double target = 2.0 / 3.0 * (m + 1.0) - alpha;
    const Complex a = invert_p_on_gap_segment(target, lat, {0});
    CHECK(a.imag() == 0.0);
    CHECK(std::abs(weierstrass_p(a, lat) - target) < 1e-10 * std::max(1.0, target));
  }
  CHECK_THROWS_AS(invert_p_on_gap_segment(e[0] - 0.1, lat, {0}), RangeError);
  CHECK_THROWS_AS(invert_p_on_gap_segment(e[1] + 0.1, lat, {1}), RangeError);
  CHECK_THROWS_AS(invert_p_on_gap_segment(0.0, lat, {2}), RangeError);
}
