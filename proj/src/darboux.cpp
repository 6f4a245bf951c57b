#include "dbands/darboux.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dbands/errors.hpp"
#include "dbands/parallel.hpp"

namespace dbands {

namespace {

/// Reference scale for comparing scaled states evaluated at nearby points.
double rescale(const ScaledState& s, double L, bool derivative) {
  return (derivative ? s.dpsi : s.psi) * std::exp(s.log_scale - L);
}

/// Zeros of f (sign changes of a scaled value) on [lo, hi] sampled at step h.
template <class F>
std::vector<double> scan_sign_changes(F&& f, Interval w, double h) {
  const auto n = static_cast<std::size_t>(std::ceil(w.length() / h));
  const std::vector<double> vals = parallel_map<double>(n + 1, [&](std::size_t i) {
    return f(w.lo + w.length() * double(i) / double(n));
  });
  std::vector<double> nodes;
  for (std::size_t i = 0; i < n; ++i) {
    double a = w.lo + w.length() * double(i) / double(n);
    double b = w.lo + w.length() * double(i + 1) / double(n);
    double fa = vals[i];
    if (fa == 0.0) {
      nodes.push_back(a);
      continue;
    }
    if (vals[i + 1] == 0.0 || (fa > 0) == (vals[i + 1] > 0)) continue;
    for (int it = 0; it < 60 && b - a > 1e-10; ++it) {
      const double m = 0.5 * (a + b), fm = f(m);
      if ((fm > 0) == (fa > 0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    nodes.push_back(0.5 * (a + b));
  }
  return nodes;
}

double scan_step_for(const PotentialSpec& V0, Interval w) {
  if (V0.period()) return *V0.period() / 256.0;
  return std::min(0.01, w.length() / 4096.0);
}

}  // namespace

TransformationFunction::TransformationFunction(double alpha, Evaluator f, std::string provenance,
                                               std::optional<std::complex<double>> beta)
    : alpha_(alpha), f_(std::move(f)), provenance_(std::move(provenance)), beta_(beta) {}

TransformationFunction from_bloch(const BlochFunction& u) {
  if (!u.is_real()) throw DomainError("from_bloch: complex Bloch function cannot transform");
  auto held = std::make_shared<const BlochFunction>(u);
  std::ostringstream os;
  os << "bloch(alpha=" << u.alpha << ",beta=" << u.beta.real() << ")";
  return TransformationFunction(
      u.alpha, [held](double x) { return held->scaled(x); }, os.str(), u.beta);
}

double transformation_residual(const TransformationFunction& u, const PotentialSpec& V0,
                               const std::vector<double>& grid) {
  constexpr double h = 1e-4;
  double worst = 0.0;
  for (double x : grid) {
    const ScaledState c = u(x), p = u(x + h), m = u(x - h);
    const double L = c.log_scale;
    const double upp = (rescale(p, L, true) - rescale(m, L, true)) / (2 * h);
    const double mag = std::max(std::abs(c.psi), std::abs(c.dpsi));
    if (mag == 0.0) continue;
    worst = std::max(worst, std::abs(upp - (V0(x) - u.alpha()) * c.psi) / mag);
  }
  return worst;
}

KappaSuperposition theorem1_normalize(const std::pair<BlochFunction, BlochFunction>& pair1,
                                      const std::pair<BlochFunction, BlochFunction>& pair2,
                                      double kappa1, double kappa2) {
  KappaSuperposition v{kappa1, kappa2, pair1.first, pair1.second, pair2.first, pair2.second};
  for (const auto* u : {&v.u1_beta, &v.u1_inv, &v.u2_beta, &v.u2_inv})
    if (!u->is_real()) throw NormalizationError("theorem1_normalize: Bloch functions must be real");
  const double x = v.u1_beta.normalization_point;
  auto sgn = [x](const BlochFunction& a, const BlochFunction& b) {
    return wronskian(a.scaled(x), b.scaled(x)).sign();
  };
  const int s1 = sgn(v.u1_beta, v.u2_beta), s2 = sgn(v.u1_beta, v.u2_inv);
  const int s3 = sgn(v.u1_inv, v.u2_beta), s4 = sgn(v.u1_inv, v.u2_inv);
  if (s1 * s2 * s3 * s4 <= 0)
    throw NormalizationError("theorem1_normalize: Wronskian sign product is not positive");
  // flipping u2b toggles (s1, s3), u2i toggles (s2, s4), u1i toggles (s3, s4)
  bool flip_u2b = s1 < 0, flip_u2i = s2 < 0;
  const int t3 = flip_u2b ? -s3 : s3;
  const bool flip_u1i = t3 < 0;
  if (flip_u2b) v.u2_beta = v.u2_beta.negated();
  if (flip_u2i) v.u2_inv = v.u2_inv.negated();
  if (flip_u1i) v.u1_inv = v.u1_inv.negated();
  return v;
}

TransformationFunction superpose_one(const BlochFunction& u_beta, const BlochFunction& u_inv,
                                     double kappa) {
  if (std::abs(u_beta.alpha - u_inv.alpha) > 1e-14 * (1 + std::abs(u_beta.alpha)))
    throw DomainError("superpose: Bloch functions at different energies");
  auto a = std::make_shared<const BlochFunction>(u_beta);
  auto b = std::make_shared<const BlochFunction>(u_inv);
  std::ostringstream os;
  os << "kappa-superposition(alpha=" << u_beta.alpha << ",kappa=" << kappa << ")";
  std::optional<std::complex<double>> beta;
  if (kappa == 0.0) beta = u_beta.beta;
  return TransformationFunction(
      u_beta.alpha, [a, b, kappa](double x) { return combine(a->scaled(x), kappa, b->scaled(x)); },
      os.str(), beta);
}

std::pair<TransformationFunction, TransformationFunction> superpose(const KappaSuperposition& v) {
  if (v.kappa1 < 0.0 || v.kappa2 < 0.0)
    throw DomainError("superpose: kappa values must be non-negative");
  const double x = v.u1_beta.normalization_point;
  auto positive = [x](const BlochFunction& a, const BlochFunction& b) {
    return wronskian(a.scaled(x), b.scaled(x)).value > 0.0;
  };
  if (!positive(v.u1_beta, v.u2_beta) || !positive(v.u1_beta, v.u2_inv) ||
      !positive(v.u1_inv, v.u2_beta) || !positive(v.u1_inv, v.u2_inv))
    throw NormalizationError("superpose: base Bloch functions are not sign-normalized");
  return {superpose_one(v.u1_beta, v.u1_inv, v.kappa1),
          superpose_one(v.u2_beta, v.u2_inv, v.kappa2)};
}

DarbouxResult::DarbouxResult(int order, PotentialSpec base,
                             std::vector<TransformationFunction> transforms, Interval window)
    : order_(order), base_(std::move(base)), transforms_(std::move(transforms)), window_(window) {}

double DarbouxResult::superpotential(double x) const {
  if (order_ != 1) throw DomainError("superpotential is defined for first order transforms");
  const ScaledState u = transforms_[0](x);
  return u.dpsi / u.psi;
}

ScaledValue DarbouxResult::wronskian(double x) const {
  if (order_ != 2) throw DomainError("wronskian is defined for second order transforms");
  return dbands::wronskian(transforms_[0](x), transforms_[1](x));
}

ScaledValue DarbouxResult::wronskian_derivative(double x) const {
  if (order_ != 2) throw DomainError("wronskian is defined for second order transforms");
  const ScaledState u1 = transforms_[0](x), u2 = transforms_[1](x);
  return {(transforms_[0].alpha() - transforms_[1].alpha()) * u1.psi * u2.psi,
          u1.log_scale + u2.log_scale};
}

double DarbouxResult::operator()(double x) const {
  const double v0 = base_(x);
  if (order_ == 1) {
    const double w = superpotential(x);
    return 2 * transforms_[0].alpha() + 2 * w * w - v0;
  }
  const ScaledState u1 = transforms_[0](x), u2 = transforms_[1](x);
  const double da = transforms_[0].alpha() - transforms_[1].alpha();
  const double W = u1.psi * u2.dpsi - u1.dpsi * u2.psi;
  const double r1 = da * u1.psi * u2.psi / W;
  const double r2 = da * (u1.dpsi * u2.psi + u1.psi * u2.dpsi) / W;
  return v0 - 2 * (r2 - r1 * r1);
}

StateVector DarbouxResult::transform_state(double x, double E, StateVector psi) const {
  const double v0 = base_(x);
  if (order_ == 1) {
    const double a = transforms_[0].alpha();
    const double w = superpotential(x);
    return {-psi.dpsi + w * psi.psi, (E - a - w * w) * psi.psi + w * psi.dpsi};
  }
  const ScaledState u1 = transforms_[0](x), u2 = transforms_[1](x);
  const double a1 = transforms_[0].alpha(), a2 = transforms_[1].alpha(), da = a1 - a2;
  const double W = u1.psi * u2.dpsi - u1.dpsi * u2.psi;
  const double G = a1 * u1.psi * u2.dpsi - a2 * u1.dpsi * u2.psi;
  const double Gp = da * (u1.dpsi * u2.dpsi + v0 * u1.psi * u2.psi);
  const double Wp = da * u1.psi * u2.psi;
  const double Wpp = da * (u1.dpsi * u2.psi + u1.psi * u2.dpsi);
  const double A = -E + G / W;
  const double B = -Wp / W;
  const double Ap = (Gp * W - G * Wp) / (W * W);
  const double Bp = -(Wpp / W - B * B);
  return {A * psi.psi + B * psi.dpsi,
          Ap * psi.psi + (A + Bp) * psi.dpsi + B * (v0 - E) * psi.psi};
}

ScaledValue DarbouxResult::wronskian3_cofactor(double x, double E, StateVector psi) const {
  if (order_ != 2) throw DomainError("wronskian3 is defined for second order transforms");
  const double v0 = base_(x);
  const ScaledState u1 = transforms_[0](x), u2 = transforms_[1](x);
  const double a1 = transforms_[0].alpha(), a2 = transforms_[1].alpha();
  const double m[3][3] = {{u1.psi, u2.psi, psi.psi},
                          {u1.dpsi, u2.dpsi, psi.dpsi},
                          {(v0 - a1) * u1.psi, (v0 - a2) * u2.psi, (v0 - E) * psi.psi}};
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  return {det, u1.log_scale + u2.log_scale};
}

ScaledValue DarbouxResult::wronskian3_reduced(double x, double E, StateVector psi) const {
  if (order_ != 2) throw DomainError("wronskian3 is defined for second order transforms");
  const ScaledState u1 = transforms_[0](x), u2 = transforms_[1](x);
  const double a1 = transforms_[0].alpha(), a2 = transforms_[1].alpha();
  const double W = u1.psi * u2.dpsi - u1.dpsi * u2.psi;
  const double val = psi.psi * (a1 * u1.psi * u2.dpsi - a2 * u1.dpsi * u2.psi) -
                     psi.dpsi * (a1 - a2) * u1.psi * u2.psi - E * psi.psi * W;
  return {val, u1.log_scale + u2.log_scale};
}

Interval default_window(const PotentialSpec& V0, double alpha) {
  if (V0.period()) return {-6.0 * *V0.period(), 6.0 * *V0.period()};
  double len = 1.0 / std::sqrt(std::max(std::abs(alpha), 1e-2));
  if (const auto* s = std::get_if<potential::OneSoliton>(&V0.kind())) len = 1.0 / s->gamma0;
  if (const auto* s = std::get_if<potential::TwoSoliton>(&V0.kind())) len = 1.0 / s->gamma1;
  return {-10.0 * len, 10.0 * len};
}

DarbouxPtr darboux1(const PotentialSpec& V0, const TransformationFunction& u,
                    std::optional<Interval> window) {
  const Interval w = window ? *window : default_window(V0, u.alpha());
  auto nodes = scan_sign_changes([&](double x) { return u(x).psi; }, w, scan_step_for(V0, w));
  if (!nodes.empty()) {
    std::ostringstream os;
    os << "darboux1: transformation function has " << nodes.size() << " node(s) in [" << w.lo
       << ", " << w.hi << "], first at " << nodes.front();
    throw SingularTransform(os.str(), std::move(nodes));
  }
  return std::make_shared<const DarbouxResult>(1, V0, std::vector<TransformationFunction>{u}, w);
}

DarbouxPtr darboux2(const PotentialSpec& V0, const TransformationFunction& u1,
                    const TransformationFunction& u2, std::optional<Interval> window) {
  const double a1 = u1.alpha(), a2 = u2.alpha();
  if (a1 == a2 && !(u1.beta() && u2.beta() && *u1.beta() != *u2.beta()))
    throw DomainError("darboux2: equal factorization energies need distinct multipliers");
  const Interval w = window ? *window : default_window(V0, std::min(a1, a2));
  auto nodes = scan_sign_changes(
      [&](double x) { return dbands::wronskian(u1(x), u2(x)).value; }, w, scan_step_for(V0, w));
  if (!nodes.empty()) {
    std::ostringstream os;
    os << "darboux2: Wronskian has " << nodes.size() << " node(s) in [" << w.lo << ", " << w.hi
       << "], first at " << nodes.front();
    throw SingularTransform(os.str(), std::move(nodes));
  }
  return std::make_shared<const DarbouxResult>(2, V0, std::vector<TransformationFunction>{u1, u2},
                                               w);
}

PotentialSpec as_potential(const DarbouxPtr& res, std::optional<double> period) {
  std::ostringstream os;
  os << "darboux" << res->order() << "(" << res->base().describe();
  for (const auto& t : res->transforms()) os << ";" << t.provenance();
  os << ")";
  return make_darboux_derived(res, os.str(), period);
}

SampledSolution transform_solution(const DarbouxResult& res, const SampledSolution& psi) {
  for (const auto& t : res.transforms())
    if (std::abs(psi.E - t.alpha()) <= 1e-12 * (1 + std::abs(t.alpha()))) {
      std::ostringstream os;
      os << "transform_solution: E = " << psi.E << " equals a factorization energy";
      throw EnergyCollision(os.str());
    }
  SampledSolution out;
  out.E = psi.E;
  out.grid = psi.grid;
  const std::size_t n = psi.grid.size();
  out.psi.resize(n);
  out.dpsi.resize(n);
  out.ddpsi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = psi.grid[i];
    const StateVector phi = res.transform_state(x, psi.E, {psi.psi[i], psi.dpsi[i]});
    out.psi[i] = phi.psi;
    out.dpsi[i] = phi.dpsi;
    out.ddpsi[i] = (res(x) - psi.E) * phi.psi;
  }
  return out;
}

std::vector<InjectedState> injected_states(const DarbouxResult& res) {
  const auto& t = res.transforms();
  if (res.order() == 1) {
    const TransformationFunction u = t[0];
    return {{u.alpha(),
             [u](double x) {
               const ScaledState s = u(x);
               return ScaledState{1.0 / s.psi, -s.dpsi / (s.psi * s.psi), -s.log_scale};
             },
             "1/u"}};
  }
  const TransformationFunction u1 = t[0], u2 = t[1];
  const double da = u1.alpha() - u2.alpha();
  // phi = u_k / W, phi' = (u_k' W - u_k W') / W^2, W' = (a1 - a2) u1 u2
  auto companion = [da, u1, u2](bool take_second) {
    return [da, u1, u2, take_second](double x) {
      const ScaledState s1 = u1(x), s2 = u2(x);
      const double W = s1.psi * s2.dpsi - s1.dpsi * s2.psi;
      const double Wp = da * s1.psi * s2.psi;
      const ScaledState& k = take_second ? s2 : s1;
      const ScaledState& other = take_second ? s1 : s2;
      return ScaledState{k.psi / W, (k.dpsi * W - k.psi * Wp) / (W * W), -other.log_scale};
    };
  };
  return {{u1.alpha(), companion(true), "u2/W"}, {u2.alpha(), companion(false), "u1/W"}};
}

double eigen_residual(const PotentialFunction& V1, const InjectedState& s,
                      const std::vector<double>& grid) {
  constexpr double h = 1e-4;
  double worst = 0.0, peak = 0.0;
  // work on a common scale taken at the grid midpoint
  const double L = s.phi(grid[grid.size() / 2]).log_scale;
  for (double x : grid) {
    const ScaledState c = s.phi(x), p = s.phi(x + h), m = s.phi(x - h);
    const double fpp = (rescale(p, L, true) - rescale(m, L, true)) / (2 * h);
    const double f = rescale(c, L, false);
    worst = std::max(worst, std::abs(fpp - (V1(x) - s.energy) * f));
    peak = std::max(peak, std::abs(f));
  }
  return peak > 0.0 ? worst / peak : worst;
}

}  // namespace dbands
