#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "dbands/band.hpp"
#include "dbands/scaled.hpp"

namespace dbands {

/// Solution with u(x + T) = beta u(x), stored over one base period
/// [origin, origin + T]. In bands the function is complex and `im` holds
/// its imaginary part; in gaps `im` is empty.
struct BlochFunction {
  double alpha = 0.0;
  std::complex<double> beta;
  double period = 0.0;
  double origin = 0.0;
  double normalization_point = 0.0;
  PotentialSpec potential = make_free();
  SampledSolution re;
  SampledSolution im;

  bool is_real() const noexcept { return im.grid.empty(); }

  /// Real part inside the base period (x in [origin, origin + T]).
  StateVector base(double x) const;
  /// Imaginary part inside the base period.
  StateVector base_im(double x) const;

  /// Real Floquet extension in log-scaled form; valid for any x.
  ScaledState scaled(double x) const;

  /// (re, im) of beta^n u(r) with x = r + n T.
  std::pair<StateVector, StateVector> complex_value(double x) const;

  BlochFunction negated() const;
};

inline constexpr int kSamplesPerPeriod = 256;

/// u^beta (|beta| >= 1 in gaps) and u^{1/beta}. Real in gaps and normalized
/// to 1 at a common point where neither vanishes; complex conjugates in bands.
std::pair<BlochFunction, BlochFunction> bloch_pair(const PotentialSpec& V, double alpha,
                                                   int samples_per_period = kSamplesPerPeriod);

/// Periodic or antiperiodic solution at a band edge, normalized to max |u| = 1.
BlochFunction edge_function(const PotentialSpec& V, double E,
                            int samples_per_period = kSamplesPerPeriod);

/// Plain (psi, psi') at any x. OverflowError if |beta|^n leaves double range.
StateVector bloch_extend(const BlochFunction& u, double x);

struct NodalSequence {
  double alpha = 0.0;
  std::vector<double> nodes;
  int count_per_period = 0;
};

/// Zeros of a real Bloch function inside `window`, each refined to 1e-10.
NodalSequence find_nodes(const BlochFunction& u, Interval window);

struct NodalRow {
  double alpha;
  std::vector<double> nodes_beta;  // zeros of u^beta in [0, T)
  std::vector<double> nodes_inv;   // zeros of u^{1/beta} in [0, T)
};

std::vector<NodalRow> nodal_curves(const PotentialSpec& V, Interval gap,
                                   const std::vector<double>& alpha_grid);

}  // namespace dbands
