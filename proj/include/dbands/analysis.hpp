#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "dbands/darboux.hpp"

namespace dbands {

using Evaluable = std::function<double(double)>;

struct DisplacementReport {
  double delta = 0.0;
  double residual_sup = 0.0;  // sup |V1(x) - V0(x + delta)| on the window samples
  Interval window{0.0, 0.0};
};

/// delta minimizing the sup-norm mismatch. Scan over [0, T) for periodic V0
/// (step T/512), otherwise over `scan`, then golden-section refinement.
DisplacementReport detect_displacement(const PotentialSpec& V0, const Evaluable& V1,
                                       Interval window,
                                       std::optional<Interval> scan = std::nullopt);

struct BoundStateReport {
  double energy = 0.0;
  double l2_norm = 0.0;
  double eigen_residual = 0.0;
  double localization_length = 0.0;  // sqrt(<x^2> - <x>^2)
  std::vector<double> nested_norms;  // squared norms on the nested windows
  bool accepted = false;
};

struct DefectReport {
  double delta_minus = 0.0;
  double delta_plus = 0.0;
  double residual_minus = 0.0;
  double residual_plus = 0.0;
  double offset = 0.0;  // X of the tail windows
  std::vector<BoundStateReport> bound_states;
};

/// Displacement fits on [c - X - tail, c - X] and [c + X, c + X + tail]. X grows
/// from 8 periods until both residuals drop below 1e-4; NotConverged if they
/// still exceed 1e-3 at 48 periods.
DefectReport asymptotic_displacements(const PotentialSpec& V0, const Evaluable& V1,
                                      double tail_length, double center = 0.0);

struct ConstancyReport {
  double c = 0.0;
  double relative_variation = 0.0;
};

/// u1(x) u2(x + delta) on the grid: median and (max - min)/|median|.
ConstancyReport theorem2_constancy(const TransformationFunction& u1,
                                   const TransformationFunction& u2, double delta,
                                   const std::vector<double>& grid);

/// Smallest relative variation over delta in [0, T) (scan T/512, then refine).
std::pair<double, ConstancyReport> theorem2_best_delta(const TransformationFunction& u1,
                                                       const TransformationFunction& u2,
                                                       double period,
                                                       const std::vector<double>& grid);

/// L2 norms on [c - X, c + X] for X in `schedule` (multiples of `unit`), plus
/// the eigen-residual on [c - 5 unit, c + 5 unit].
BoundStateReport bound_state_check(const PotentialFunction& V1, const InjectedState& candidate,
                                   double unit, double center = 0.0,
                                   std::vector<double> schedule = {20.0, 40.0, 80.0});

/// max |D0(E) - D1(E)| over the energy grid. NotPeriodic if V1 fails the
/// periodicity probe.
double isospectrality_check(const PotentialSpec& V0, const PotentialSpec& V1,
                            const std::vector<double>& energies);

}  // namespace dbands
