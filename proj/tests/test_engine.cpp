#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "dbands/catalog.hpp"
#include "dbands/engine.hpp"
#include "dbands/errors.hpp"
#include "dbands/specfun.hpp"
#include "oracles.hpp"

using namespace dbands;

namespace {

PotentialSpec collage_a() { return catalog::periodize(catalog::make_one_soliton(0.9), 5.0); }

double max_dev(const TransferMatrix& b, double a11, double a12, double a21, double a22) {
  return std::max({std::abs(b.b11 - a11), std::abs(b.b12 - a12), std::abs(b.b21 - a21),
                   std::abs(b.b22 - a22)});
}

}  // namespace

TEST_CASE("transfer_matrix: free particle") {
  const auto V = make_free();
  const double pi = std::numbers::pi;
  CHECK(max_dev(transfer_matrix(V, 1.0, 0.0, pi), -1.0, 0.0, 0.0, -1.0) < 1e-9);
  const double c = std::cosh(1.0), s = std::sinh(1.0);
  CHECK(max_dev(transfer_matrix(V, -1.0, 0.0, 1.0), c, s, s, c) < 1e-10);
  // backwards
  CHECK(max_dev(transfer_matrix(V, -1.0, 1.0, 0.0), c, -s, -s, c) < 1e-10);
}

TEST_CASE("transfer_matrix: collage trace near the lowest band edge") {
  // D is ~2500 per unit energy here, so the 4-decimal edge -0.8107 sits at
  // |D| = 1.754; the crossing itself must lie within 2e-3 of it.
  const auto V = collage_a();
  const auto b = transfer_matrix(V, -0.8107, -5.0, 5.0);
  CHECK(std::abs(b.trace() - catalog::lyapunov_soliton1_analytic(-0.8107, 5.0, 0.9)) < 1e-8);
  CHECK(std::abs(b.det() - 1.0) < 1e-9);
  auto excess = [&](double E) { return std::abs(transfer_matrix(V, E, -5.0, 5.0).trace()) - 2.0; };
  double lo = -0.8107 - 2e-3, hi = -0.8107;
  REQUIRE(excess(lo) * excess(hi) < 0.0);
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) * excess(lo) > 0.0 ? lo : hi) = mid;
  }
  CHECK(std::abs(excess(0.5 * (lo + hi))) < 5e-3);
  CHECK(std::abs(0.5 * (lo + hi) + 0.8107) < 2e-3);
}

TEST_CASE("transfer_matrix: determinant, composition and reversal") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const PotentialSpec pots[] = {collage_a(), catalog::make_lame(1, 0.5), catalog::make_lame(3, 0.3),
                                catalog::make_one_soliton(0.6), catalog::make_two_soliton(0.8, 0.805),
                                catalog::periodize(catalog::make_one_soliton(0.4), 2.0)};
  for (int k = 0; k < 100; ++k) {
    const PotentialSpec& V = pots[k % 6];
    const double E = -1.0 + 4.0 * U(rng);
    const double x0 = -6.0 + 12.0 * U(rng), x1 = x0 + 0.5 + 5.0 * U(rng);
    const auto b = transfer_matrix(V, E, x0, x1);
    const double scale = std::max({1.0, std::abs(b.b11), std::abs(b.b12), std::abs(b.b21), std::abs(b.b22)});
    CHECK(std::abs(b.det() - 1.0) < 1e-9 * scale);
    const double xm = x0 + (x1 - x0) * U(rng);
    const auto c = compose(transfer_matrix(V, E, xm, x1), transfer_matrix(V, E, x0, xm));
    CHECK(max_dev(c, b.b11, b.b12, b.b21, b.b22) < 1e-8 * scale);
    const auto id = compose(transfer_matrix(V, E, x1, x0), b);
    CHECK(max_dev(id, 1.0, 0.0, 0.0, 1.0) < 1e-8 * scale);
  }
}

TEST_CASE("transfer_matrix: tolerance and singular potentials") {
  CHECK_THROWS_AS(transfer_matrix(make_free(), 1.0, 0.0, 1.0, 1e-15), DomainError);
  CHECK_THROWS_AS(transfer_matrix(make_free(), 1.0, 0.0, 1.0, 1e-3), DomainError);
  struct Pole : PotentialFunction {
    double operator()(double x) const override { return 1.0 / (x * x * x * x); }
  };
  struct Hole : PotentialFunction {
    double operator()(double x) const override { return std::abs(x) < 0.05 ? std::nan("") : 0.0; }
  };
  const auto V = make_darboux_derived(std::make_shared<Pole>(), "pole", std::nullopt);
  CHECK_THROWS_AS(transfer_matrix(V, 0.0, -1.0, 1.0), IntegrationError);
  const auto H = make_darboux_derived(std::make_shared<Hole>(), "hole", std::nullopt);
  CHECK_THROWS_AS(transfer_matrix(H, 0.0, -1.0, 1.0), IntegrationError);
}

TEST_CASE("solve_iv: free cosine") {
  const auto s = solve_iv(make_free(), 4.0, 0.0, {1.0, 0.0}, {-3.0, 5.0}, 32);
  CHECK(s.grid.front() == -3.0);
  CHECK(s.grid.back() == 5.0);
  double err = 0.0;
  for (std::size_t i = 0; i < s.grid.size(); ++i) err = std::max(err, std::abs(s.psi[i] - std::cos(2 * s.grid[i])));
  CHECK(err < 1e-9);
  double ierr = 0.0;
  for (double x = -2.9; x < 4.9; x += 0.0137) ierr = std::max(ierr, std::abs(s.interpolate(x).psi - std::cos(2 * x)));
  CHECK(ierr < 1e-6);
  CHECK_THROWS_AS(s.interpolate(6.0), DomainError);
}

TEST_CASE("solve_iv: 1-soliton closed forms") {
  const double g0 = 0.6, g1 = 1.0;
  const auto V = catalog::make_one_soliton(g0);
  const double d = std::atanh(g0 / g1) / g0;
  auto exact = [&](double x) {
    return std::cosh(g0 * (x + d)) / std::cosh(g0 * x) * std::exp(-g1 * x);
  };
  auto dexact = [&](double x) {
    return exact(x) * (g0 * std::tanh(g0 * (x + d)) - g0 * std::tanh(g0 * x) - g1);
  };
  const auto s = solve_iv(V, -g1 * g1, 0.0, {exact(0.0), dexact(0.0)}, {-10.0, 10.0}, 32);
  double err = 0.0;
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    const double x = s.grid[i];
    err = std::max(err, std::abs(s.psi[i] - exact(x)) / std::max(1.0, std::abs(exact(x))));
  }
  CHECK(err < 1e-8);

  // bound-side and scattering solutions from the intertwiner
  for (auto [E, k] : {std::pair{-0.09, 0.3}, std::pair{1.44, 1.2}}) {
    auto ref = [&](double x) {
      return E < 0 ? oracle::soliton1_bound_side(g0, k, x) : oracle::soliton1_scattering(g0, k, x);
    };
    const auto r0 = ref(-4.0);
    const auto t = solve_iv(V, E, -4.0, {r0.psi, r0.dpsi}, {-4.0, 6.0}, 16);
    double e2 = 0.0;
    for (std::size_t i = 0; i < t.grid.size(); ++i) e2 = std::max(e2, std::abs(t.psi[i] - ref(t.grid[i]).psi));
    CHECK(e2 < 1e-8);
  }
}

TEST_CASE("solve_iv: Lame ground state dn") {
  const double m = 0.5;
  const specfun::EllipticParameter mp(m);
  const auto V = catalog::make_lame(1, m);
  const auto s = solve_iv(V, m, 0.0, {1.0, 0.0}, {-4.0, 8.0}, 32);
  double err = 0.0;
  for (std::size_t i = 0; i < s.grid.size(); ++i)
    err = std::max(err, std::abs(s.psi[i] - specfun::jacobi_sn_cn_dn(s.grid[i], mp).dn));
  CHECK(err < 1e-9);
}

TEST_CASE("solve_iv: Wronskian conservation and guards") {
  const auto V = collage_a();
  const auto a = solve_iv(V, 0.3, 1.0, {1.0, 0.0}, {-12.0, 12.0}, 16);
  const auto b = solve_iv(V, 0.3, 1.0, {0.0, 1.0}, {-12.0, 12.0}, 16);
  for (std::size_t i = 0; i < a.grid.size(); ++i)
    CHECK(std::abs(a.psi[i] * b.dpsi[i] - a.dpsi[i] * b.psi[i] - 1.0) < 1e-8);
  CHECK_THROWS_AS(solve_iv(V, 0.3, 1.0, {1.0, 0.0}, {2.0, 3.0}, 16), DomainError);
  CHECK_THROWS_AS(solve_iv(V, 0.3, 1.0, {1.0, 0.0}, {0.0, 3.0}, 8), DomainError);
  CHECK_THROWS_AS(solve_iv(make_free(), -25.0, 0.0, {1.0, 0.0}, {0.0, 20.0}, 16), OverflowError);
}

TEST_CASE("potential specs: periodicity, kinks and shifts") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(-50.0, 50.0);
  for (const PotentialSpec& V : {collage_a(), catalog::make_lame(1, 0.5), catalog::make_lame(2, 0.8)}) {
    const double T = *V.period();
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const double x = U(rng);
      worst = std::max(worst, std::abs(V(x + T) - V(x)));
    }
    CHECK(worst < 1e-10);
  }
  const auto kinks = collage_a().kinks(-12.0, 16.0);
  REQUIRE(kinks.size() == 3);
  CHECK(kinks[0] == -5.0);
  CHECK(kinks[1] == 5.0);
  CHECK(kinks[2] == 15.0);
  const auto S = make_shifted(collage_a(), 0.3);
  CHECK(S(1.0) == collage_a()(1.3));
  CHECK(S.kinks(0.0, 6.0).size() == 1);
  CHECK(std::abs(S.kinks(0.0, 6.0)[0] - 4.7) < 1e-14);

  std::vector<double> g, v;
  for (int i = 0; i <= 200; ++i) {
    g.push_back(i * 0.05);
    v.push_back(std::sin(g.back()));
  }
  const auto sp = make_sampled(g, v);
  CHECK(std::abs(sp(3.333) - std::sin(3.333)) < 1e-5);
}
