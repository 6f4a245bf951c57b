#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dbands/bloch.hpp"
#include "dbands/scaled.hpp"

namespace dbands {

/// Solution u of -u'' + V0 u = alpha u, evaluable on the whole line.
class TransformationFunction {
 public:
  using Evaluator = std::function<ScaledState(double)>;

  TransformationFunction(double alpha, Evaluator f, std::string provenance,
                         std::optional<std::complex<double>> beta = std::nullopt);

  double alpha() const noexcept { return alpha_; }
  ScaledState operator()(double x) const { return f_(x); }
  const std::string& provenance() const noexcept { return provenance_; }
  const std::optional<std::complex<double>>& beta() const noexcept { return beta_; }

 private:
  double alpha_;
  Evaluator f_;
  std::string provenance_;
  std::optional<std::complex<double>> beta_;
};

TransformationFunction from_bloch(const BlochFunction& u);

/// max over the grid of |u'' - (V0 - alpha) u| / |u|, with u'' from a
/// central difference of the exact u' (step 1e-4).
double transformation_residual(const TransformationFunction& u, const PotentialSpec& V0,
                               const std::vector<double>& grid);

struct KappaSuperposition {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  BlochFunction u1_beta, u1_inv, u2_beta, u2_inv;
};

/// Sign flips that make W(u1b,u2b), W(u1b,u2i), W(u1i,u2b), W(u1i,u2i) all
/// positive. NormalizationError if their sign product is negative.
KappaSuperposition theorem1_normalize(const std::pair<BlochFunction, BlochFunction>& pair1,
                                      const std::pair<BlochFunction, BlochFunction>& pair2,
                                      double kappa1 = 0.0, double kappa2 = 0.0);

/// v1 = u1b + k1 u1i, v2 = u2b + k2 u2i.
std::pair<TransformationFunction, TransformationFunction> superpose(const KappaSuperposition& v);

/// Single-energy superposition u_beta + kappa u_inv.
TransformationFunction superpose_one(const BlochFunction& u_beta, const BlochFunction& u_inv,
                                     double kappa);

struct InjectedState {
  double energy;
  std::function<ScaledState(double)> phi;
  std::string label;
};

class DarbouxResult : public PotentialFunction {
 public:
  DarbouxResult(int order, PotentialSpec base, std::vector<TransformationFunction> transforms,
                Interval window);

  int order() const noexcept { return order_; }
  const PotentialSpec& base() const noexcept { return base_; }
  const std::vector<TransformationFunction>& transforms() const noexcept { return transforms_; }
  const Interval& window() const noexcept { return window_; }

  /// V1(x)
  double operator()(double x) const override;
  std::vector<double> kinks(double x0, double x1) const override { return base_.kinks(x0, x1); }

  /// w = u'/u (order 1)
  double superpotential(double x) const;
  /// W(u1, u2) (order 2)
  ScaledValue wronskian(double x) const;
  /// W'(u1, u2) = (alpha1 - alpha2) u1 u2 (order 2)
  ScaledValue wronskian_derivative(double x) const;

  /// Intertwiner applied to a base solution (psi, psi') at energy E.
  StateVector transform_state(double x, double E, StateVector psi) const;

  /// W(u1, u2, psi) with the second-derivative row from the base equation
  /// (cofactor form) or with V0 eliminated (reduced form).
  ScaledValue wronskian3_cofactor(double x, double E, StateVector psi) const;
  ScaledValue wronskian3_reduced(double x, double E, StateVector psi) const;

 private:
  int order_;
  PotentialSpec base_;
  std::vector<TransformationFunction> transforms_;
  Interval window_;
};

using DarbouxPtr = std::shared_ptr<const DarbouxResult>;

/// Default node-check window: 12 periods about 0, or +-10 decay lengths.
Interval default_window(const PotentialSpec& V0, double alpha);

DarbouxPtr darboux1(const PotentialSpec& V0, const TransformationFunction& u,
                    std::optional<Interval> window = std::nullopt);

DarbouxPtr darboux2(const PotentialSpec& V0, const TransformationFunction& u1,
                    const TransformationFunction& u2,
                    std::optional<Interval> window = std::nullopt);

/// V1 wrapped as a potential; pass the base period for pure-Bloch transforms.
PotentialSpec as_potential(const DarbouxPtr& res, std::optional<double> period = std::nullopt);

/// phi = L psi on the grid of psi; ddpsi holds (V1 - E) phi.
SampledSolution transform_solution(const DarbouxResult& res, const SampledSolution& psi);

/// Order 1: (alpha, 1/u). Order 2: (alpha1, u2/W), (alpha2, u1/W).
std::vector<InjectedState> injected_states(const DarbouxResult& res);

/// max |phi'' - (V1 - E) phi| / max |phi| over the grid, phi'' by central
/// difference of the exact phi' (step 1e-4).
double eigen_residual(const PotentialFunction& V1, const InjectedState& s,
                      const std::vector<double>& grid);

}  // namespace dbands
