#include "dbands/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dbands/errors.hpp"
#include "dbands/parallel.hpp"

namespace dbands {

namespace {

using C = std::complex<double>;

std::vector<double> period_grid(double origin, double T, int n) {
  std::vector<double> g(n + 1);
  for (int i = 0; i <= n; ++i) g[i] = origin + T * i / n;
  g[n] = origin + T;
  return g;
}

StateVector eval_sampled(const PotentialSpec& V, double E, const SampledSolution& s, double x) {
  const double lo = s.grid.front(), hi = s.grid.back();
  const int n = static_cast<int>(s.grid.size()) - 1;
  const double h = (hi - lo) / n;
  const int i = std::clamp(static_cast<int>(std::lround((x - lo) / h)), 0, n);
  const double xi = s.grid[i];
  if (x == xi) return {s.psi[i], s.dpsi[i]};
  return propagate_local(V, E, xi, {s.psi[i], s.dpsi[i]}, x);
}

void scale_solution(SampledSolution& s, double c) {
  for (auto* v : {&s.psi, &s.dpsi, &s.ddpsi})
    for (double& x : *v) x *= c;
}

/// (re, im) <- Re/Im of c (re + i im)
void rotate_solution(SampledSolution& re, SampledSolution& im, C c) {
  auto mix = [&](std::vector<double>& a, std::vector<double>& b) {
    for (std::size_t k = 0; k < a.size(); ++k) {
      const C z = c * C(a[k], b[k]);
      a[k] = z.real();
      b[k] = z.imag();
    }
  };
  mix(re.psi, im.psi);
  mix(re.dpsi, im.dpsi);
  mix(re.ddpsi, im.ddpsi);
}

StateVector real_eigenvector(const TransferMatrix& b, double beta) {
  const StateVector v1{b.b12, beta - b.b11}, v2{beta - b.b22, b.b21};
  const double n1 = std::hypot(v1.psi, v1.dpsi), n2 = std::hypot(v2.psi, v2.dpsi);
  if (std::max(n1, n2) == 0.0) return {1.0, 0.0};
  const StateVector v = n1 >= n2 ? v1 : v2;
  const double nv = std::max(n1, n2);
  return {v.psi / nv, v.dpsi / nv};
}

/// Real Bloch solution sampled over [0, T]; decaying functions are
/// integrated backward from T so the dominant solution never contaminates them.
SampledSolution sample_real(const PotentialSpec& V, double E, const TransferMatrix& b,
                            double beta, int samples) {
  const double T = b.x1 - b.x0;
  const StateVector v = real_eigenvector(b, beta);
  auto grid = period_grid(0.0, T, samples);
  if (std::abs(beta) >= 1.0) return solve_on_grid(V, E, 0.0, v, std::move(grid));
  return solve_on_grid(V, E, T, {beta * v.psi, beta * v.dpsi}, std::move(grid));
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

StateVector BlochFunction::base(double x) const { return eval_sampled(potential, alpha, re, x); }

StateVector BlochFunction::base_im(double x) const {
  if (is_real()) return {0.0, 0.0};
  return eval_sampled(potential, alpha, im, x);
}

ScaledState BlochFunction::scaled(double x) const {
  const double n = std::floor((x - origin) / period);
  const double r = std::clamp(x - n * period, origin, origin + period);
  const StateVector s = base(r);
  const double b = beta.real();
  const double sign = (b < 0 && std::fmod(std::abs(n), 2.0) == 1.0) ? -1.0 : 1.0;
  return {sign * s.psi, sign * s.dpsi, n * std::log(std::abs(b))};
}

std::pair<StateVector, StateVector> BlochFunction::complex_value(double x) const {
  const double n = std::floor((x - origin) / period);
  const double r = std::clamp(x - n * period, origin, origin + period);
  const StateVector a = base(r), c = base_im(r);
  const double lg = n * std::log(std::abs(beta));
  if (lg > 700.0) {
    std::ostringstream os;
    os << "bloch_extend: |beta|^n overflows (n = " << n << ", log|beta| = " << std::log(std::abs(beta))
       << ")";
    throw OverflowError(os.str());
  }
  const C bn = std::pow(beta, n);
  const C p = bn * C(a.psi, c.psi), d = bn * C(a.dpsi, c.dpsi);
  return {{p.real(), d.real()}, {p.imag(), d.imag()}};
}

BlochFunction BlochFunction::negated() const {
  BlochFunction out = *this;
  scale_solution(out.re, -1.0);
  if (!out.is_real()) scale_solution(out.im, -1.0);
  return out;
}

StateVector bloch_extend(const BlochFunction& u, double x) { return u.complex_value(x).first; }

std::pair<BlochFunction, BlochFunction> bloch_pair(const PotentialSpec& V, double alpha,
                                                   int samples_per_period) {
  const double T = require_period(V);
  if (samples_per_period < 16) throw DomainError("bloch_pair: at least 16 samples per period");
  const TransferMatrix b = transfer_matrix(V, alpha, 0.0, T);
  const double D = b.trace();
  if (std::abs(std::abs(D) - 2.0) < kEdgeTol) {
    std::ostringstream os;
    os << "bloch_pair: alpha = " << alpha << " is a band edge (D = " << D
       << "); use edge_function";
    throw EdgeDegeneracy(os.str());
  }
  const auto [bp, bm] = floquet_multipliers(D);
  BlochFunction u1, u2;
  for (auto* u : {&u1, &u2}) {
    u->alpha = alpha;
    u->period = T;
    u->origin = 0.0;
    u->potential = V;
  }
  u1.beta = bp;
  u2.beta = bm;

  if (std::abs(D) > 2.0) {
    u1.re = sample_real(V, alpha, b, bp.real(), samples_per_period);
    u2.re = sample_real(V, alpha, b, bm.real(), samples_per_period);
    // normalization point: both functions as far from zero as possible
    const double m1 = max_abs(u1.re.psi), m2 = max_abs(u2.re.psi);
    std::size_t best = 0;
    double score = -1.0;
    for (std::size_t i = 0; i + 1 < u1.re.psi.size(); ++i) {
      const double s = std::min(std::abs(u1.re.psi[i]) / m1, std::abs(u2.re.psi[i]) / m2);
      if (s > score) {
        score = s;
        best = i;
      }
    }
    const double x0 = u1.re.grid[best];
    scale_solution(u1.re, 1.0 / u1.re.psi[best]);
    scale_solution(u2.re, 1.0 / u2.re.psi[best]);
    u1.normalization_point = u2.normalization_point = x0;
    return {u1, u2};
  }

  // band: complex eigenvector (b12, beta - b11), split into real and imaginary runs
  auto grid = period_grid(0.0, T, samples_per_period);
  StateVector vr{b.b12, bp.real() - b.b11}, vi{0.0, bp.imag()};
  if (std::hypot(b.b12, bp.real() - b.b11) + std::abs(bp.imag()) <
      std::hypot(bp.real() - b.b22, b.b21) + std::abs(bp.imag())) {
    vr = {bp.real() - b.b22, b.b21};
    vi = {bp.imag(), 0.0};
  }
  u1.re = solve_on_grid(V, alpha, 0.0, vr, grid);
  u1.im = solve_on_grid(V, alpha, 0.0, vi, grid);
  std::size_t best = 0;
  double big = -1.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double mod = std::hypot(u1.re.psi[i], u1.im.psi[i]);
    if (mod > big) {
      big = mod;
      best = i;
    }
  }
  rotate_solution(u1.re, u1.im, 1.0 / C(u1.re.psi[best], u1.im.psi[best]));
  u1.normalization_point = grid[best];
  u2 = u1;
  u2.beta = bm;
  scale_solution(u2.im, -1.0);
  return {u1, u2};
}

BlochFunction edge_function(const PotentialSpec& V, double E, int samples_per_period) {
  const double T = require_period(V);
  const TransferMatrix b = transfer_matrix(V, E, 0.0, T);
  const double D = b.trace();
  if (std::abs(std::abs(D) - 2.0) > 1e-6) {
    std::ostringstream os;
    os << "edge_function: E = " << E << " is not a band edge (D = " << D << ")";
    throw DomainError(os.str());
  }
  const double beta = D > 0 ? 1.0 : -1.0;
  BlochFunction u;
  u.alpha = E;
  u.beta = beta;
  u.period = T;
  u.potential = V;
  u.re = solve_on_grid(V, E, 0.0, real_eigenvector(b, beta), period_grid(0.0, T, samples_per_period));
  double m = 0.0;
  std::size_t at = 0;
  for (std::size_t i = 0; i < u.re.psi.size(); ++i)
    if (std::abs(u.re.psi[i]) > m) {
      m = std::abs(u.re.psi[i]);
      at = i;
    }
  scale_solution(u.re, 1.0 / u.re.psi[at]);
  u.normalization_point = u.re.grid[at];
  return u;
}

NodalSequence find_nodes(const BlochFunction& u, Interval window) {
  if (!u.is_real()) throw DomainError("find_nodes: Bloch function is complex (inside a band)");
  const auto& s = u.re;
  const int n = static_cast<int>(s.grid.size()) - 1;
  auto f = [&](double x) { return u.base(x).psi; };

  std::vector<double> base_nodes;
  auto bisect = [&](double a, double b, double fa) {
    for (int it = 0; it < 200 && b - a > 1e-11; ++it) {
      const double mid = 0.5 * (a + b);
      const double fm = f(mid);
      if (fm == 0.0) return mid;
      if ((fm > 0) == (fa > 0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    return 0.5 * (a + b);
  };
  constexpr int kSub = 8;
  for (int i = 0; i < n; ++i) {
    const double a = s.grid[i], h = s.grid[i + 1] - a;
    // subsample each cell so close pairs of zeros are not missed
    double xa = a, fa = s.psi[i];
    if (fa == 0.0) {
      base_nodes.push_back(a);
    }
    for (int k = 1; k <= kSub; ++k) {
      const double xb = k == kSub ? s.grid[i + 1] : a + h * k / kSub;
      const double fb = k == kSub ? s.psi[i + 1] : f(xb);
      if (fa != 0.0 && fb != 0.0 && (fa > 0) != (fb > 0)) base_nodes.push_back(bisect(xa, xb, fa));
      xa = xb;
      fa = fb;
    }
  }
  std::sort(base_nodes.begin(), base_nodes.end());
  for (std::size_t k = 1; k < base_nodes.size(); ++k)
    if (base_nodes[k] - base_nodes[k - 1] < 1e-9)
      throw GridTooCoarse("find_nodes: zeros closer than the refinement resolution");

  NodalSequence out;
  out.alpha = u.alpha;
  out.count_per_period = static_cast<int>(base_nodes.size());
  if (base_nodes.empty()) return out;
  const double T = u.period;
  const long k0 = static_cast<long>(std::floor((window.lo - u.origin) / T)) - 1;
  const long k1 = static_cast<long>(std::ceil((window.hi - u.origin) / T)) + 1;
  for (long k = k0; k <= k1; ++k)
    for (double z : base_nodes) {
      const double x = z + k * T;
      if (x > window.lo && x < window.hi) out.nodes.push_back(x);
    }
  return out;
}

std::vector<NodalRow> nodal_curves(const PotentialSpec& V, Interval gap,
                                   const std::vector<double>& alpha_grid) {
  for (double a : alpha_grid)
    if (!(a > gap.lo && a < gap.hi)) throw DomainError("nodal_curves: alpha outside the gap");
  const double T = require_period(V);
  return parallel_map<NodalRow>(alpha_grid.size(), [&](std::size_t i) {
    const auto [ub, ui] = bloch_pair(V, alpha_grid[i]);
    const Interval w{-1e-12, T - 1e-12};
    return NodalRow{alpha_grid[i], find_nodes(ub, w).nodes, find_nodes(ui, w).nodes};
  });
}

}  // namespace dbands
