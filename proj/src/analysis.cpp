#include "dbands/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "dbands/band.hpp"
#include "dbands/errors.hpp"
#include "dbands/parallel.hpp"

namespace dbands {

namespace {

std::vector<double> sample_points(Interval w, double step) {
  const auto n = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(w.length() / step)));
  std::vector<double> xs(n + 1);
  for (std::size_t i = 0; i <= n; ++i) xs[i] = w.lo + w.length() * double(i) / double(n);
  return xs;
}

double product_value(const ScaledState& a, const ScaledState& b) {
  return a.psi * b.psi * std::exp(a.log_scale + b.log_scale);
}

}  // namespace

DisplacementReport detect_displacement(const PotentialSpec& V0, const Evaluable& V1,
                                       Interval window, std::optional<Interval> scan) {
  Interval range;
  if (scan) {
    range = *scan;
  } else if (V0.period()) {
    range = {0.0, *V0.period()};
  } else {
    range = {-0.5 * window.length(), 0.5 * window.length()};
  }
  const double sample_step =
      V0.period() ? std::min(*V0.period() / 128.0, window.length() / 512.0) : window.length() / 1024.0;
  const std::vector<double> xs = sample_points(window, sample_step);
  const std::vector<double> v1 = parallel_map<double>(xs.size(), [&](std::size_t i) { return V1(xs[i]); });
  auto mismatch = [&](double d) {
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) s = std::max(s, std::abs(v1[i] - V0(xs[i] + d)));
    return s;
  };
  const double step = V0.period() && !scan ? *V0.period() / 512.0 : range.length() / 2048.0;
  const auto n = static_cast<std::size_t>(std::round(range.length() / step));
  const std::vector<double> obj =
      parallel_map<double>(n, [&](std::size_t k) { return mismatch(range.lo + k * step); });
  const auto [mn, mx] = std::minmax_element(obj.begin(), obj.end());
  if (*mx - *mn < 1e-12)
    throw FlatObjective("detect_displacement: mismatch is flat across the scan");
  const double d0 = range.lo + double(mn - obj.begin()) * step;
  const auto r = boost::math::tools::brent_find_minima(mismatch, d0 - step, d0 + step, 40);
  DisplacementReport out;
  out.delta = r.first;
  out.residual_sup = r.second;
  // the sup-norm minimum is a kink; parabolic steps stall near it, so
  // finish with plain golden-section shrinking
  {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = out.delta - 1e-5, b = out.delta + 1e-5;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = mismatch(c), fd = mismatch(d);
    while (b - a > 1e-13 * std::max(1.0, std::abs(out.delta))) {
      if (fc <= fd) {
        b = d; d = c; fd = fc;
        c = b - g * (b - a); fc = mismatch(c);
      } else {
        a = c; c = d; fc = fd;
        d = a + g * (b - a); fd = mismatch(d);
      }
    }
    const double m = 0.5 * (a + b), fm = mismatch(m);
    if (fm < out.residual_sup) {
      out.delta = m;
      out.residual_sup = fm;
    }
  }
  if (obj[mn - obj.begin()] < out.residual_sup) {
    out.delta = d0;
    out.residual_sup = *mn;
  }
  if (V0.period() && !scan) {
    const double T = *V0.period();
    out.delta -= T * std::floor(out.delta / T);
  }
  out.window = window;
  return out;
}

DefectReport asymptotic_displacements(const PotentialSpec& V0, const Evaluable& V1,
                                      double tail_length, double center) {
  const double T = require_period(V0);
  DefectReport rep;
  for (double periods = 8.0; periods <= 48.0; periods += 8.0) {
    const double X = periods * T;
    const auto left = detect_displacement(V0, V1, {center - X - tail_length, center - X});
    const auto right = detect_displacement(V0, V1, {center + X, center + X + tail_length});
    rep.delta_minus = left.delta;
    rep.delta_plus = right.delta;
    rep.residual_minus = left.residual_sup;
    rep.residual_plus = right.residual_sup;
    rep.offset = X;
    if (std::max(left.residual_sup, right.residual_sup) < 1e-4) return rep;
  }
  if (std::max(rep.residual_minus, rep.residual_plus) > 1e-3) {
    std::ostringstream os;
    os << "asymptotic_displacements: tail residuals " << rep.residual_minus << ", "
       << rep.residual_plus << " at X = " << rep.offset;
    throw NotConverged(os.str());
  }
  return rep;
}

ConstancyReport theorem2_constancy(const TransformationFunction& u1,
                                   const TransformationFunction& u2, double delta,
                                   const std::vector<double>& grid) {
  std::vector<double> p;
  p.reserve(grid.size());
  for (double x : grid) p.push_back(product_value(u1(x), u2(x + delta)));
  const auto [mn, mx] = std::minmax_element(p.begin(), p.end());
  const double scale = std::max(std::abs(*mn), std::abs(*mx));
  if (*mn <= 0.0 && *mx >= 0.0) {
    std::ostringstream os;
    os << "theorem2_constancy: product changes sign or vanishes on the grid (delta = " << delta
       << ")";
    throw ZeroProduct(os.str());
  }
  if (scale == 0.0) throw ZeroProduct("theorem2_constancy: product vanishes");
  std::vector<double> sorted = p;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double c = sorted[sorted.size() / 2];
  return {c, (*mx - *mn) / std::abs(c)};
}

std::pair<double, ConstancyReport> theorem2_best_delta(const TransformationFunction& u1,
                                                       const TransformationFunction& u2,
                                                       double period,
                                                       const std::vector<double>& grid) {
  auto variation = [&](double d) {
    try {
      return theorem2_constancy(u1, u2, d, grid).relative_variation;
    } catch (const ZeroProduct&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  const double step = period / 512.0;
  const std::vector<double> v =
      parallel_map<double>(512, [&](std::size_t k) { return variation(k * step); });
  const auto best = static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
  const double d0 = best * step;
  const auto r = boost::math::tools::brent_find_minima(variation, d0 - step, d0 + step, 40);
  const double d = r.second < v[best] ? r.first : d0;
  return {d, theorem2_constancy(u1, u2, d, grid)};
}

BoundStateReport bound_state_check(const PotentialFunction& V1, const InjectedState& candidate,
                                   double unit, double center, std::vector<double> schedule) {
  BoundStateReport rep;
  rep.energy = candidate.energy;
  std::sort(schedule.begin(), schedule.end());
  const double step = unit / 64.0;
  const double Xmax = schedule.back() * unit;
  const std::vector<double> xs = sample_points({center - Xmax, center + Xmax}, step);
  const std::vector<double> dens = parallel_map<double>(xs.size(), [&](std::size_t i) {
    const double v = candidate.phi(xs[i]).value();
    return v * v;
  });
  const double h = xs[1] - xs[0];
  // trapezoid sums over nested symmetric windows
  for (double s : schedule) {
    const double X = s * unit;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
      if (xs[i] >= center - X - 1e-9 && xs[i + 1] <= center + X + 1e-9)
        acc += 0.5 * h * (dens[i] + dens[i + 1]);
    rep.nested_norms.push_back(acc);
  }
  const double N = rep.nested_norms.back();
  rep.l2_norm = std::sqrt(N);
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    m1 += dens[i] * xs[i] * h;
    m2 += dens[i] * xs[i] * xs[i] * h;
  }
  if (N > 0.0 && std::isfinite(N)) rep.localization_length = std::sqrt(std::max(0.0, m2 / N - (m1 / N) * (m1 / N)));
  std::vector<double> probe;
  for (int i = 0; i <= 400; ++i) probe.push_back(center - 5 * unit + 10 * unit * i / 400.0);
  rep.eigen_residual = eigen_residual(V1, candidate, probe);

  bool decaying = std::isfinite(N) && N > 0.0;
  for (std::size_t k = 2; decaying && k < rep.nested_norms.size(); ++k) {
    const double d1 = rep.nested_norms[k - 1] - rep.nested_norms[k - 2];
    const double d2 = rep.nested_norms[k] - rep.nested_norms[k - 1];
    decaying = d2 <= std::max(0.5 * d1, 1e-10 * N);
  }
  if (rep.nested_norms.size() >= 2) {
    const double d = rep.nested_norms[1] - rep.nested_norms[0];
    decaying = decaying && d <= 1e-3 * N;
  }
  rep.accepted = decaying && rep.eigen_residual < 1e-5;
  return rep;
}

double isospectrality_check(const PotentialSpec& V0, const PotentialSpec& V1,
                            const std::vector<double>& energies) {
  const double T = require_period(V0);
  for (int k = 0; k < 16; ++k) {
    const double x = -T + 0.37 * T * k;
    const double diff = std::abs(V1(x + T) - V1(x));
    if (diff > 1e-8 * (1.0 + std::abs(V1(x)))) {
      std::ostringstream os;
      os << "isospectrality_check: V1(x + T) - V1(x) = " << diff << " at x = " << x;
      throw NotPeriodic(os.str());
    }
  }
  const PotentialSpec W = V1.period() ? V1 : PotentialSpec(V1.kind(), T);
  const std::vector<double> d = parallel_map<double>(energies.size(), [&](std::size_t i) {
    return std::abs(discriminant(V0, energies[i]) - discriminant(W, energies[i]));
  });
  return d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
}

}  // namespace dbands
