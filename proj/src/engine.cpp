#include "dbands/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "dbands/errors.hpp"

namespace dbands {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

template <std::size_t N>
using Vec = std::array<double, N>;

// N = 2 (one solution) or 4 (two columns).
template <std::size_t N>
struct System {
  const PotentialSpec& V;
  double E;

  Vec<N> operator()(double x, const Vec<N>& y) const {
    const double q = V(x) - E;
    if (!std::isfinite(q)) {
      std::ostringstream os;
      os << "potential not finite at x=" << x;
      throw IntegrationError(os.str());
    }
    Vec<N> f;
    for (std::size_t i = 0; i < N; i += 2) {
      f[i] = y[i + 1];
      f[i + 1] = q * y[i];
    }
    return f;
  }
};

template <std::size_t N>
Vec<N> axpy(const Vec<N>& y, double h, std::initializer_list<std::pair<double, const Vec<N>*>> terms) {
  Vec<N> out = y;
  for (const auto& [c, k] : terms)
    if (c != 0.0)
      for (std::size_t i = 0; i < N; ++i) out[i] += h * c * (*k)[i];
  return out;
}

// One step; returns the 5th order solution, the error estimate and the
// derivative at the new point (FSAL).
template <std::size_t N>
struct StepResult {
  Vec<N> y;
  Vec<N> err;
  Vec<N> f_end;
};

template <std::size_t N>
StepResult<N> dopri_step(const System<N>& f, double x, const Vec<N>& y, const Vec<N>& k1,
                         double h) {
  const Vec<N> k2 = f(x + c2 * h, axpy<N>(y, h, {{a21, &k1}}));
  const Vec<N> k3 = f(x + c3 * h, axpy<N>(y, h, {{a31, &k1}, {a32, &k2}}));
  const Vec<N> k4 = f(x + c4 * h, axpy<N>(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
  const Vec<N> k5 =
      f(x + c5 * h, axpy<N>(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
  const Vec<N> k6 = f(x + h, axpy<N>(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4},
                                             {a65, &k5}}));
  StepResult<N> r;
  r.y = axpy<N>(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
  r.f_end = f(x + h, r.y);
  for (std::size_t i = 0; i < N; ++i)
    r.err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                    e7 * r.f_end[i]);
  return r;
}

// Error norm relative to the size of each (psi, psi') column.
template <std::size_t N>
double error_norm(const Vec<N>& y0, const Vec<N>& y1, const Vec<N>& err, double tol) {
  double worst = 0.0;
  for (std::size_t c = 0; c < N; c += 2) {
    const double scale =
        std::max({std::abs(y0[c]), std::abs(y0[c + 1]), std::abs(y1[c]), std::abs(y1[c + 1]),
                  1e-300});
    worst = std::max({worst, std::abs(err[c]) / scale, std::abs(err[c + 1]) / scale});
  }
  return worst / tol;
}

// Adaptive integration over a smooth stretch [x0, x1]; h carries the step
// size hint across calls.
template <std::size_t N>
Vec<N> integrate_smooth(const System<N>& f, double x0, Vec<N> y, double x1, double tol,
                        double& h) {
  const double span = x1 - x0;
  if (span == 0.0) return y;
  const double dir = span > 0 ? 1.0 : -1.0;
  const double hmax = 0.5;
  if (h <= 0.0 || !std::isfinite(h)) h = std::min(0.05, std::abs(span));
  h = std::min({h, hmax, std::abs(span)});
  double x = x0;
  Vec<N> k1 = f(x, y);
  int guard = 0;
  while (dir * (x1 - x) > 0.0) {
    if (++guard > 20000000) throw IntegrationError("too many integration steps");
    double step = std::min(h, std::abs(x1 - x));
    const bool last = step >= std::abs(x1 - x);
    const StepResult<N> r = dopri_step(f, x, y, k1, dir * step);
    const double en = error_norm(y, r.y, r.err, tol);
    if (!std::isfinite(en) || !std::all_of(r.y.begin(), r.y.end(), [](double v) { return std::isfinite(v); }))
      throw IntegrationError("non-finite state during integration");
    if (en <= 1.0) {
      x = last ? x1 : x + dir * step;
      y = r.y;
      k1 = r.f_end;
      const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      if (!last || fac < 1.0) h = std::min(hmax, step * fac);
    } else {
      h = step * std::clamp(0.9 * std::pow(en, -0.25), 0.1, 0.9);
      if (h < 1e-14 * (1.0 + std::abs(x))) {
        std::ostringstream os;
        os << "step size underflow at x=" << x << " (singular potential?)";
        throw IntegrationError(os.str());
      }
    }
  }
  return y;
}

// Splits [x0, x1] at the potential's seams so that no step straddles a kink.
template <std::size_t N>
Vec<N> integrate(const PotentialSpec& V, double E, double x0, Vec<N> y, double x1, double tol,
                 double& h) {
  if (!(tol >= 1e-13 && tol <= 1e-6)) throw DomainError("integration tolerance outside [1e-13, 1e-6]");
  const System<N> f{V, E};
  std::vector<double> cuts = V.kinks(x0, x1);
  if (x1 < x0) std::reverse(cuts.begin(), cuts.end());
  double x = x0;
  for (double c : cuts) {
    y = integrate_smooth(f, x, y, c, tol, h);
    x = c;
  }
  return integrate_smooth(f, x, y, x1, tol, h);
}

}  // namespace

TransferMatrix compose(const TransferMatrix& later, const TransferMatrix& earlier) {
  TransferMatrix r;
  r.b11 = later.b11 * earlier.b11 + later.b12 * earlier.b21;
  r.b12 = later.b11 * earlier.b12 + later.b12 * earlier.b22;
  r.b21 = later.b21 * earlier.b11 + later.b22 * earlier.b21;
  r.b22 = later.b21 * earlier.b12 + later.b22 * earlier.b22;
  r.x0 = earlier.x0;
  r.x1 = later.x1;
  r.E = later.E;
  return r;
}

StateVector SampledSolution::interpolate(double x) const {
  if (grid.size() < 2) throw DomainError("interpolate: empty solution");
  if (x < grid.front() || x > grid.back()) throw DomainError("interpolate: outside sampled window");
  auto it = std::upper_bound(grid.begin(), grid.end(), x);
  std::size_t i = static_cast<std::size_t>(it - grid.begin());
  i = std::clamp<std::size_t>(i, 1, grid.size() - 1) - 1;
  const double h = grid[i + 1] - grid[i];
  const double t = (x - grid[i]) / h;
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  return {h00 * psi[i] + h10 * h * dpsi[i] + h01 * psi[i + 1] + h11 * h * dpsi[i + 1],
          h00 * dpsi[i] + h10 * h * ddpsi[i] + h01 * dpsi[i + 1] + h11 * h * ddpsi[i + 1]};
}

TransferMatrix transfer_matrix(const PotentialSpec& V, double E, double x0, double x1,
                               double tol) {
  double h = 0.0;
  const Vec<4> y = integrate<4>(V, E, x0, Vec<4>{1.0, 0.0, 0.0, 1.0}, x1, tol, h);
  TransferMatrix b;
  b.b11 = y[0];
  b.b21 = y[1];
  b.b12 = y[2];
  b.b22 = y[3];
  b.x0 = x0;
  b.x1 = x1;
  b.E = E;
  return b;
}

StateVector propagate(const PotentialSpec& V, double E, double x0, StateVector s, double x1,
                      double tol) {
  double h = 0.0;
  const Vec<2> y = integrate<2>(V, E, x0, Vec<2>{s.psi, s.dpsi}, x1, tol, h);
  return {y[0], y[1]};
}

StateVector propagate_local(const PotentialSpec& V, double E, double x0, StateVector s,
                            double x1) {
  const double span = x1 - x0;
  if (span == 0.0) return s;
  const System<2> f{V, E};
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(span) / 0.005)));
  const double h = span / n;
  Vec<2> y{s.psi, s.dpsi};
  double x = x0;
  Vec<2> k1 = f(x, y);
  for (int i = 0; i < n; ++i) {
    const StepResult<2> r = dopri_step(f, x, y, k1, h);
    y = r.y;
    k1 = r.f_end;
    x = x0 + (i + 1) * h;
  }
  return {y[0], y[1]};
}

double efold_estimate(const PotentialSpec& V, double E, double a, double b) {
  if (b < a) std::swap(a, b);
  const int n = std::max(16, static_cast<int>(std::ceil((b - a) * 32.0)));
  const double h = (b - a) / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    s += w * std::sqrt(std::max(V(a + i * h) - E, 0.0));
  }
  return s * h;
}

SampledSolution solve_iv(const PotentialSpec& V, double E, double x0, StateVector init,
                         Interval window, int samples_per_unit, double tol) {
  if (!(window.hi > window.lo) || !window.contains(x0))
    throw DomainError("solve_iv: window must be non-empty and contain x0");
  if (samples_per_unit < 16) throw DomainError("solve_iv: samples_per_unit must be >= 16");
  for (auto [a, b] : {std::pair{window.lo, x0}, std::pair{x0, window.hi}}) {
    const double ef = efold_estimate(V, E, a, b);
    if (ef > kMaxEfolds) {
      std::ostringstream os;
      os << "solve_iv: window spans ~" << ef << " e-folds from x0; use Floquet extension";
      throw OverflowError(os.str());
    }
  }
  const int n = std::max(2, static_cast<int>(std::ceil(window.length() * samples_per_unit)));
  std::vector<double> grid(n + 1);
  for (int i = 0; i <= n; ++i) grid[i] = window.lo + window.length() * i / n;
  grid[n] = window.hi;
  return solve_on_grid(V, E, x0, init, std::move(grid), tol);
}

SampledSolution solve_on_grid(const PotentialSpec& V, double E, double x0, StateVector init,
                              std::vector<double> grid, double tol) {
  if (grid.size() < 2 || !std::is_sorted(grid.begin(), grid.end()))
    throw DomainError("solve_on_grid: grid must be increasing with at least two nodes");
  const int n = static_cast<int>(grid.size()) - 1;
  SampledSolution out;
  out.E = E;
  out.grid = std::move(grid);
  out.psi.resize(n + 1);
  out.dpsi.resize(n + 1);
  out.ddpsi.resize(n + 1);

  const auto first_right =
      static_cast<int>(std::lower_bound(out.grid.begin(), out.grid.end(), x0) - out.grid.begin());
  auto store = [&](int i, const StateVector& s) {
    if (std::abs(s.psi) > 1e280 || std::abs(s.dpsi) > 1e280)
      throw OverflowError("solve_iv: |psi| exceeded 1e280");
    out.psi[i] = s.psi;
    out.dpsi[i] = s.dpsi;
    out.ddpsi[i] = (V(out.grid[i]) - E) * s.psi;
  };
  // forward
  {
    StateVector s = init;
    double x = x0, h = 0.0;
    for (int i = first_right; i <= n; ++i) {
      const Vec<2> y = integrate<2>(V, E, x, Vec<2>{s.psi, s.dpsi}, out.grid[i], tol, h);
      s = {y[0], y[1]};
      x = out.grid[i];
      store(i, s);
    }
  }
  // backward
  {
    StateVector s = init;
    double x = x0, h = 0.0;
    for (int i = first_right - 1; i >= 0; --i) {
      const Vec<2> y = integrate<2>(V, E, x, Vec<2>{s.psi, s.dpsi}, out.grid[i], tol, h);
      s = {y[0], y[1]};
      x = out.grid[i];
      store(i, s);
    }
  }
  return out;
}

}  // namespace dbands
