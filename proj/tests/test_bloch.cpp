#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "dbands/bloch.hpp"
#include "dbands/catalog.hpp"
#include "dbands/errors.hpp"
#include "oracles.hpp"

using namespace dbands;

namespace {

const PotentialSpec& lame1() {
  static const PotentialSpec V = catalog::make_lame(1, 0.5);
  return V;
}

double floquet_residual(const BlochFunction& u, double x) {
  const double T = u.period;
  if (u.is_real()) {
    const StateVector a = bloch_extend(u, x), b = bloch_extend(u, x + T);
    const double br = u.beta.real();
    return std::hypot(b.psi - br * a.psi, b.dpsi - br * a.dpsi) / std::hypot(a.psi, a.dpsi);
  }
  const auto [ar, ai] = u.complex_value(x);
  const auto [br, bi] = u.complex_value(x + T);
  const std::complex<double> p0(ar.psi, ai.psi), d0(ar.dpsi, ai.dpsi);
  const std::complex<double> p1(br.psi, bi.psi), d1(br.dpsi, bi.dpsi);
  return std::hypot(std::abs(p1 - u.beta * p0), std::abs(d1 - u.beta * d0)) /
         std::hypot(std::abs(p0), std::abs(d0));
}

}  // namespace

TEST_CASE("bloch_pair: free particle below zero") {
  const double T = 1.3;
  const auto [up, um] = bloch_pair(make_free(T), -1.0);
  CHECK(up.is_real());
  CHECK(std::abs(up.beta.real() - std::exp(T)) < 1e-9 * std::exp(T));
  CHECK(std::abs(um.beta.real() - std::exp(-T)) < 1e-9);
  for (double x : {-4.0, -0.7, 0.0, 0.4, 2.9, 6.1}) {
    const double r0 = bloch_extend(up, x).psi / bloch_extend(up, 0.0).psi;
    const double r1 = bloch_extend(um, x).psi / bloch_extend(um, 0.0).psi;
    CHECK(std::abs(r0 / std::exp(x) - 1.0) < 1e-8);
    CHECK(std::abs(r1 / std::exp(-x) - 1.0) < 1e-8);
  }
}

TEST_CASE("bloch_extend: multiplier law") {
  const double T = 0.9;
  const double kappa = std::log(2.0) / T;
  const auto [u, v] = bloch_pair(make_free(T), -kappa * kappa);
  CHECK(std::abs(u.beta.real() - 2.0) < 1e-9);
  const StateVector a = bloch_extend(u, 0.3), b = bloch_extend(u, 0.3 + 3 * T);
  CHECK(std::abs(b.psi - 8.0 * a.psi) < 1e-8 * std::abs(b.psi));
  CHECK(std::abs(b.dpsi - 8.0 * a.dpsi) < 1e-8 * std::abs(b.dpsi));
  (void)v;
}

TEST_CASE("bloch_extend: in-band modulus is periodic") {
  const auto [u, w] = bloch_pair(lame1(), 0.75);
  REQUIRE(!u.is_real());
  CHECK(std::abs(std::abs(u.beta) - 1.0) < 1e-10);
  CHECK(std::abs(u.beta - std::conj(w.beta)) < 1e-12);
  const double T = u.period;
  for (double x : {0.1, 1.7, 3.0}) {
    const auto [r0, i0] = u.complex_value(x);
    for (int n : {-7, -1, 2, 25}) {
      const auto [r1, i1] = u.complex_value(x + n * T);
      CHECK(std::abs(std::hypot(r1.psi, i1.psi) - std::hypot(r0.psi, i0.psi)) < 1e-8);
    }
    // conjugate partner
    const auto [wr, wi] = w.complex_value(x);
    CHECK(std::abs(wr.psi - r0.psi) < 1e-10);
    CHECK(std::abs(wi.psi + i0.psi) < 1e-10);
  }
}

TEST_CASE("bloch: Floquet residual at 50 random points") {
  std::mt19937 rng(5);
  const auto collage = catalog::periodize(catalog::make_one_soliton(0.4), 2.0);
  std::vector<BlochFunction> fs;
  for (double a : {0.35, 0.75, 1.1, 1.2, 1.4, 2.5}) {
    auto [p, q] = bloch_pair(lame1(), a);
    fs.push_back(p);
    fs.push_back(q);
  }
  for (double a : {-0.5, 0.0, 0.35, 1.0}) {
    auto [p, q] = bloch_pair(collage, a);
    fs.push_back(p);
    fs.push_back(q);
  }
  for (const auto& u : fs) {
    std::uniform_real_distribution<double> U(-5 * u.period, 5 * u.period);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) worst = std::max(worst, floquet_residual(u, U(rng)));
    INFO("alpha = " << u.alpha << " beta = " << u.beta);
    CHECK(worst < 1e-7);
  }
}

TEST_CASE("bloch: real functions satisfy the ODE between samples") {
  const auto [u, v] = bloch_pair(lame1(), 1.1);
  const double h = 1e-4;
  double worst = 0.0;
  for (double x = 0.013; x < 3 * u.period; x += 0.137) {
    for (const auto* f : {&u, &v}) {
      const double d2 = (bloch_extend(*f, x + h).dpsi - bloch_extend(*f, x - h).dpsi) / (2 * h);
      const StateVector s = bloch_extend(*f, x);
      const double V = lame1()(x);
      worst = std::max(worst, std::abs(d2 - (V - 1.1) * s.psi) / std::max(1.0, std::abs(s.psi)));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("bloch_extend agrees with direct integration over three periods") {
  const auto [u, v] = bloch_pair(lame1(), 1.1);
  for (const auto* f : {&u, &v}) {
    const double x0 = 0.4;
    const StateVector s0 = bloch_extend(*f, x0);
    std::vector<double> grid;
    for (int i = 0; i <= 60; ++i) grid.push_back(x0 + 3 * f->period * i / 60.0);
    const auto sol = solve_iv(lame1(), 1.1, x0, s0, {grid.front(), grid.back()}, 60);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < sol.grid.size(); ++i) scale = std::max(scale, std::abs(sol.psi[i]));
    for (std::size_t i = 0; i < sol.grid.size(); ++i)
      worst = std::max(worst, std::abs(bloch_extend(*f, sol.grid[i]).psi - sol.psi[i]));
    CHECK(worst / scale < 1e-7);
  }
}

TEST_CASE("bloch: gap functions are real and positively normalized") {
  for (double a : {0.35, 1.2}) {
    const auto [u, v] = bloch_pair(lame1(), a);
    CHECK(u.is_real());
    CHECK(v.is_real());
    CHECK(std::abs(u.beta.imag()) == 0.0);
    CHECK(std::abs(u.beta.real() * v.beta.real() - 1.0) < 1e-10);
    CHECK(std::abs(u.beta.real()) > 1.0);
    CHECK(u.normalization_point == v.normalization_point);
    CHECK(std::abs(u.base(u.normalization_point).psi - 1.0) < 1e-12);
    CHECK(std::abs(v.base(v.normalization_point).psi - 1.0) < 1e-12);
  }
  CHECK(bloch_pair(lame1(), 1.2).first.beta.real() < 0.0);
}

TEST_CASE("bloch: edge degeneracy and edge functions") {
  CHECK_THROWS_AS(bloch_pair(lame1(), 1.0), EdgeDegeneracy);
  CHECK_THROWS_AS(bloch_pair(lame1(), 0.5), EdgeDegeneracy);
  // E = 1 edge solution is cn(x|m), antiperiodic over 2K
  const auto c = edge_function(lame1(), 1.0);
  CHECK(c.beta.real() == doctest::Approx(-1.0).epsilon(1e-8));
  const double x0 = 0.3;
  const double ratio = c.base(x0).psi / oracle::jacobi_landen(x0, 0.5).cn;
  double worst = 0.0;
  for (double x = 0.0; x < c.period; x += c.period / 37) {
    worst = std::max(worst, std::abs(c.base(x).psi - ratio * oracle::jacobi_landen(x, 0.5).cn));
  }
  CHECK(worst < 1e-8);
  // close to an edge the pair still satisfies the boundary relation
  const auto [p, q] = bloch_pair(lame1(), 1.0 + 1e-6);
  CHECK(floquet_residual(p, 0.77) < 1e-7);
  CHECK(floquet_residual(q, 0.77) < 1e-7);
}

TEST_CASE("find_nodes: counts per period") {
  const auto T = lame1().period().value();
  for (double a : {0.35, -2.0}) {
    const auto [u, v] = bloch_pair(lame1(), a);
    CHECK(find_nodes(u, {-5 * T, 5 * T}).nodes.empty());
    CHECK(find_nodes(v, {-5 * T, 5 * T}).nodes.empty());
  }
  for (double a : {1.05, 1.2, 1.45}) {
    const auto [u, v] = bloch_pair(lame1(), a);
    const auto nu = find_nodes(u, {0.0, 6 * T});
    const auto nv = find_nodes(v, {0.0, 6 * T});
    CHECK(nu.count_per_period == 1);
    CHECK(nv.count_per_period == 1);
    CHECK(nu.nodes.size() == 6);
    for (double z : nu.nodes) CHECK(std::abs(bloch_extend(u, z).psi) < 1e-9 * std::abs(bloch_extend(u, z).dpsi));
  }
}

TEST_CASE("find_nodes: gap index j = 0, 1, 2") {
  const double m = 0.3, r = 2.0 * std::sqrt(m * m - m + 1.0);
  const auto V = catalog::make_lame(2, m);
  // gaps: (-inf, 2m+2-r), (1+m, 1+4m), (4+m, 2m+2+r)
  const double alphas[] = {2 * m + 2 - r - 0.5, 1 + 2.5 * m, 4 + m + 0.5 * (2 * m + 2 + r - 4 - m)};
  for (int j = 0; j < 3; ++j) {
    const auto [u, v] = bloch_pair(V, alphas[j]);
    CHECK(find_nodes(u, {0.0, 4 * u.period}).count_per_period == j);
    CHECK(find_nodes(v, {0.0, 4 * v.period}).count_per_period == j);
    CHECK(gap_index_by_nodes(V, alphas[j]) == j);
  }
  const auto C = catalog::periodize(catalog::make_one_soliton(0.4), 2.0);
  const double calphas[] = {-0.4, 0.35, 2.2};
  for (int j = 0; j < 3; ++j) {
    const auto [u, v] = bloch_pair(C, calphas[j]);
    CHECK(find_nodes(u, {-8.0, 8.0}).count_per_period == j);
    CHECK(find_nodes(v, {-8.0, 8.0}).count_per_period == j);
  }
}

TEST_CASE("find_nodes: alternation of two functions from one gap") {
  const double T = lame1().period().value();
  const auto [a1, b1] = bloch_pair(lame1(), 1.1);
  const auto [a2, b2] = bloch_pair(lame1(), 1.4);
  for (const auto* f1 : {&a1, &b1}) {
    for (const auto* f2 : {&a2, &b2}) {
      std::vector<std::pair<double, int>> merged;
      for (double z : find_nodes(*f1, {0.0, 10 * T}).nodes) merged.push_back({z, 1});
      for (double z : find_nodes(*f2, {0.0, 10 * T}).nodes) merged.push_back({z, 2});
      std::sort(merged.begin(), merged.end());
      REQUIRE(merged.size() >= 18);
      bool alternates = true;
      for (std::size_t i = 1; i < merged.size(); ++i) {
        alternates = alternates && merged[i].second != merged[i - 1].second;
        CHECK(merged[i].first - merged[i - 1].first > 1e-6);
      }
      CHECK(alternates);
    }
  }
}

TEST_CASE("nodal_curves: monotone branches in the first gap of Lame(1, 0.99)") {
  const auto V = catalog::make_lame(1, 0.99);
  const double T = V.period().value();
  std::vector<double> grid;
  for (int i = 1; i < 40; ++i) grid.push_back(1.0 + 0.99 * i / 40.0);
  const auto rows = nodal_curves(V, {1.0, 1.99}, grid);
  REQUIRE(rows.size() == grid.size());
  for (const auto& r : rows) {
    REQUIRE(r.nodes_beta.size() == 1);
    REQUIRE(r.nodes_inv.size() == 1);
    CHECK(std::abs(r.nodes_beta[0] - r.nodes_inv[0]) > 1e-6);
  }
  // follow each branch on the circle x mod T; steps must keep one sign
  for (int which = 0; which < 2; ++which) {
    int sign = 0;
    bool monotone = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double a = which ? rows[i - 1].nodes_inv[0] : rows[i - 1].nodes_beta[0];
      const double b = which ? rows[i].nodes_inv[0] : rows[i].nodes_beta[0];
      double d = std::remainder(b - a, T);
      const int s = d > 0 ? 1 : -1;
      if (sign == 0) sign = s;
      monotone = monotone && s == sign && std::abs(d) > 0.0;
    }
    CHECK(monotone);
  }
}
