#pragma once

// Integration of -psi'' + V psi = E psi written as the first order system
// d/dx (psi, psi') = (psi', (V - E) psi).

#include <vector>

#include "dbands/potential.hpp"

namespace dbands {

struct Interval {
  double lo;
  double hi;
  double length() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

struct StateVector {
  double psi = 0.0;
  double dpsi = 0.0;
};

/// Maps (psi, psi')(x0) to (psi, psi')(x1) at fixed energy. Columns are
/// the canonical solutions v1 (1, 0) and v2 (0, 1) started at x0.
struct TransferMatrix {
  double b11 = 1.0, b12 = 0.0, b21 = 0.0, b22 = 1.0;
  double x0 = 0.0, x1 = 0.0;
  double E = 0.0;

  double det() const noexcept { return b11 * b22 - b12 * b21; }
  double trace() const noexcept { return b11 + b22; }
  StateVector apply(StateVector s) const noexcept {
    return {b11 * s.psi + b12 * s.dpsi, b21 * s.psi + b22 * s.dpsi};
  }
};

/// this-after-other: (a * b) maps through b first.
TransferMatrix compose(const TransferMatrix& later, const TransferMatrix& earlier);

struct SampledSolution {
  std::vector<double> grid;
  std::vector<double> psi;
  std::vector<double> dpsi;
  std::vector<double> ddpsi;  // (V - E) psi at the nodes
  double E = 0.0;

  /// Cubic Hermite interpolation: psi from (psi, psi'), psi' from (psi', psi'').
  StateVector interpolate(double x) const;
};

inline constexpr double kDefaultTol = 1e-11;
/// Largest growth exponent (in e-folds) raw initial-value integration accepts.
inline constexpr double kMaxEfolds = 40.0;

TransferMatrix transfer_matrix(const PotentialSpec& V, double E, double x0, double x1,
                               double tol = kDefaultTol);

/// Adaptive propagation of a single state from x0 to x1 (either direction).
StateVector propagate(const PotentialSpec& V, double E, double x0, StateVector s, double x1,
                      double tol = kDefaultTol);

/// Fixed short steps (|h| <= 0.005) of the 5th order formula; intended for
/// hops of a fraction of a sampling cell where adaptivity is wasted.
StateVector propagate_local(const PotentialSpec& V, double E, double x0, StateVector s,
                            double x1);

SampledSolution solve_iv(const PotentialSpec& V, double E, double x0, StateVector init,
                         Interval window, int samples_per_unit, double tol = kDefaultTol);

/// Samples the solution through (x0, init) at the given increasing nodes.
/// No growth check; callers bound the e-folds themselves.
SampledSolution solve_on_grid(const PotentialSpec& V, double E, double x0, StateVector init,
                              std::vector<double> grid, double tol = kDefaultTol);

/// Estimated growth exponent int sqrt(max(V - E, 0)) dx between a and b.
double efold_estimate(const PotentialSpec& V, double E, double a, double b);

}  // namespace dbands
