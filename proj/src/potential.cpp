#include "dbands/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dbands/errors.hpp"
#include "dbands/specfun.hpp"

namespace dbands {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Exponentially scaled hyperbolics: cosh(g x) e^{-g|x|}, sinh(g x) e^{-g|x|}.
double ch_scaled(double gx) { return 0.5 * (1.0 + std::exp(-2.0 * std::abs(gx))); }
double sh_scaled(double gx) {
  return std::copysign(0.5 * -std::expm1(-2.0 * std::abs(gx)), gx);
}

// The symmetric 2-soliton well written as -2 (ln W12)'' with
// W12 = W(cosh g1 x, sinh g2 x); no csch singularity at the origin.
double two_soliton(double g1, double g2, double x) {
  const double c1 = ch_scaled(g1 * x), s1 = sh_scaled(g1 * x);
  const double c2 = ch_scaled(g2 * x), s2 = sh_scaled(g2 * x);
  const double d = g2 * g2 - g1 * g1;
  const double W = g2 * c1 * c2 - g1 * s1 * s2;
  const double Wp = d * c1 * s2;
  const double Wpp = d * (g1 * s1 * s2 + g2 * c1 * c2);
  return -2.0 * (Wpp / W - (Wp / W) * (Wp / W));
}

double spline_eval(const potential::Sampled& s, double x) {
  const auto& g = s.grid;
  if (x <= g.front()) return s.values.front();
  if (x >= g.back()) return s.values.back();
  const auto it = std::upper_bound(g.begin(), g.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - g.begin()) - 1;
  const double h = g[i + 1] - g[i];
  const double a = (g[i + 1] - x) / h, b = (x - g[i]) / h;
  return a * s.values[i] + b * s.values[i + 1] +
         ((a * a * a - a) * s.second[i] + (b * b * b - b) * s.second[i + 1]) * h * h / 6.0;
}

}  // namespace

PotentialSpec::PotentialSpec(potential::Kind kind, std::optional<double> period)
    : kind_(std::move(kind)), period_(period) {
  if (period_ && !(*period_ > 0.0 && std::isfinite(*period_)))
    throw DomainError("PotentialSpec: period must be positive and finite");
}

double PotentialSpec::operator()(double x) const {
  using namespace potential;
  return std::visit(
      overloaded{
          [](const Free&) { return 0.0; },
          [x](const OneSoliton& p) {
            const double s = 1.0 / std::cosh(p.gamma0 * x);
            return -2.0 * p.gamma0 * p.gamma0 * s * s;
          },
          [x](const TwoSoliton& p) { return two_soliton(p.gamma1, p.gamma2, x); },
          [x](const Lame& p) {
            const double sn = specfun::jacobi_sn_cn_dn(x, specfun::EllipticParameter(p.m)).sn;
            return p.n * (p.n + 1.0) * p.m * sn * sn;
          },
          [x](const Collage& p) {
            const double T = 2.0 * p.half_width;
            const double r = x + p.half_width - T * std::floor((x + p.half_width) / T);
            return (*p.base)(r - p.half_width);
          },
          [x](const Shifted& p) { return (*p.base)(x + p.delta); },
          [this, x](const Sampled& p) {
            if (period_) {
              const double lo = p.grid.front();
              return spline_eval(p, x - *period_ * std::floor((x - lo) / *period_));
            }
            return spline_eval(p, x);
          },
          [x](const DarbouxDerived& p) { return (*p.fn)(x); },
      },
      kind_);
}

std::vector<double> PotentialSpec::kinks(double x0, double x1) const {
  using namespace potential;
  if (x1 < x0) std::swap(x0, x1);
  std::vector<double> out;
  std::visit(overloaded{
                 [&](const Collage& p) {
                   const double a = p.half_width;
                   // seams at (2k+1) a
                   const double kmin = std::ceil((x0 - a) / (2.0 * a));
                   for (double k = kmin;; k += 1.0) {
                     const double s = (2.0 * k + 1.0) * a;
                     if (s >= x1) break;
                     if (s > x0) out.push_back(s);
                   }
                 },
                 [&](const Shifted& p) {
                   for (double s : p.base->kinks(x0 + p.delta, x1 + p.delta))
                     out.push_back(s - p.delta);
                 },
                 [&](const DarbouxDerived& p) { out = p.fn->kinks(x0, x1); },
                 [](const auto&) {},
             },
             kind_);
  return out;
}

std::string PotentialSpec::describe() const {
  using namespace potential;
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Free&) { os << "free"; },
                 [&](const OneSoliton& p) { os << "soliton1(gamma0=" << p.gamma0 << ")"; },
                 [&](const TwoSoliton& p) {
                   os << "soliton2(gamma1=" << p.gamma1 << ",gamma2=" << p.gamma2 << ")";
                 },
                 [&](const Lame& p) { os << "lame(n=" << p.n << ",m=" << p.m << ")"; },
                 [&](const Collage& p) {
                   os << "collage(" << p.base->describe() << ",a=" << p.half_width << ")";
                 },
                 [&](const Shifted& p) {
                   os << "shifted(" << p.base->describe() << ",delta=" << p.delta << ")";
                 },
                 [&](const Sampled& p) { os << "sampled(n=" << p.grid.size() << ")"; },
                 [&](const DarbouxDerived& p) { os << "darboux(" << p.label << ")"; },
             },
             kind_);
  if (period_) os << "[T=" << *period_ << "]";
  return os.str();
}

PotentialSpec make_free(std::optional<double> period) {
  return PotentialSpec(potential::Free{}, period);
}

PotentialSpec make_sampled(std::vector<double> grid, std::vector<double> values,
                           std::optional<double> period) {
  const std::size_t n = grid.size();
  if (n < 3 || values.size() != n) throw DomainError("make_sampled: need >= 3 aligned samples");
  for (std::size_t i = 1; i < n; ++i)
    if (!(grid[i] > grid[i - 1])) throw DomainError("make_sampled: grid not increasing");
  // Natural spline second derivatives (tridiagonal solve).
  std::vector<double> y2(n, 0.0), u(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double sig = (grid[i] - grid[i - 1]) / (grid[i + 1] - grid[i - 1]);
    const double p = sig * y2[i - 1] + 2.0;
    y2[i] = (sig - 1.0) / p;
    const double d = (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]) -
                     (values[i] - values[i - 1]) / (grid[i] - grid[i - 1]);
    u[i] = (6.0 * d / (grid[i + 1] - grid[i - 1]) - sig * u[i - 1]) / p;
  }
  y2[n - 1] = 0.0;
  for (std::size_t k = n - 1; k-- > 0;) y2[k] = y2[k] * y2[k + 1] + u[k];
  return PotentialSpec(potential::Sampled{std::move(grid), std::move(values), std::move(y2)},
                       period);
}

PotentialSpec make_shifted(const PotentialSpec& base, double delta) {
  return PotentialSpec(potential::Shifted{std::make_shared<const PotentialSpec>(base), delta},
                       base.period());
}

PotentialSpec make_darboux_derived(std::shared_ptr<const PotentialFunction> fn,
                                   std::string label, std::optional<double> period) {
  return PotentialSpec(potential::DarbouxDerived{std::move(fn), std::move(label)}, period);
}

}  // namespace dbands
