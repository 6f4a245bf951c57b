#include "dbands/catalog.hpp"

#include <cmath>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "dbands/errors.hpp"

namespace dbands::catalog {

namespace {

using specfun::Complex;

double ch_scaled(double y) { return 0.5 * (1.0 + std::exp(-2.0 * std::abs(y))); }
double sh_scaled(double y) { return std::copysign(0.5 * -std::expm1(-2.0 * std::abs(y)), y); }

void require_positive(double g, const char* what) {
  if (!(g > 0.0) || !std::isfinite(g)) throw DomainError(std::string(what) + " must be positive");
}

}  // namespace

PotentialSpec make_one_soliton(double gamma0) {
  require_positive(gamma0, "gamma0");
  return PotentialSpec(potential::OneSoliton{gamma0}, std::nullopt);
}

PotentialSpec make_two_soliton(double gamma1, double gamma2) {
  require_positive(gamma1, "gamma1");
  require_positive(gamma2, "gamma2");
  if (!(gamma1 < gamma2)) throw DomainError("two-soliton well needs gamma1 < gamma2");
  return PotentialSpec(potential::TwoSoliton{gamma1, gamma2}, std::nullopt);
}

PotentialSpec make_lame(int n, double m) {
  if (n < 1) throw DomainError("Lame index n must be >= 1");
  const specfun::EllipticParameter mp(m);
  const double K = specfun::complete_elliptic(mp).K;
  return PotentialSpec(potential::Lame{n, m, K}, 2.0 * K);
}

PotentialSpec periodize(const PotentialSpec& base, double a) {
  require_positive(a, "half width a");
  return PotentialSpec(potential::Collage{std::make_shared<const PotentialSpec>(base), a}, 2.0 * a);
}

double soliton1_shift(double gamma0, double gamma1, SolitonSeedFlavor flavor) {
  require_positive(gamma0, "gamma0");
  require_positive(gamma1, "gamma1");
  if (flavor == SolitonSeedFlavor::RealShift) {
    if (!(gamma1 > gamma0)) throw DomainError("real shift seed needs gamma1 > gamma0");
    return std::atanh(gamma0 / gamma1) / gamma0;
  }
  if (!(gamma1 < gamma0)) throw DomainError("complex half-period seed needs gamma1 < gamma0");
  return std::atanh(gamma1 / gamma0) / gamma0;
}

TransformationFunction soliton1_bloch_seed(double g0, double g1, SolitonSeedFlavor flavor) {
  const double d = soliton1_shift(g0, g1, flavor);
  const bool real = flavor == SolitonSeedFlavor::RealShift;
  std::ostringstream os;
  os << (real ? "soliton1-real" : "soliton1-complex") << "(gamma0=" << g0 << ",gamma1=" << g1
     << ")";
  return TransformationFunction(
      -g1 * g1,
      [g0, g1, d, real](double x) {
        const double y = g0 * (x + d), z = g0 * x;
        const double cy = ch_scaled(y), sy = sh_scaled(y), cz = ch_scaled(z);
        const double tz = std::tanh(z);
        const double num = real ? cy : sy, dnum = real ? sy : cy;
        return ScaledState{num / cz, (g0 * dnum - g0 * num * tz - g1 * num) / cz,
                           std::abs(y) - std::abs(z) - g1 * x};
      },
      os.str());
}

double lyapunov_soliton1_analytic(double E, double a, double gamma0) {
  require_positive(a, "a");
  if (!(gamma0 >= 0.0)) throw DomainError("gamma0 must be non-negative");
  const double w0 = gamma0 * std::tanh(gamma0 * a);
  const double g2 = gamma0 * gamma0, w2 = w0 * w0;
  if (E > 0.0) {
    const double k = std::sqrt(E);
    return 2.0 * ((w0 / k) * ((w2 - 2 * E - g2) / (E + g2)) * std::sin(2 * k * a) +
                  (1.0 - 2 * w2 / (E + g2)) * std::cos(2 * k * a));
  }
  if (E < 0.0) {
    const double kap = std::sqrt(-E);
    const double den = g2 + E;  // k^2 + g0^2 with k = i kappa
    if (den == 0.0) throw DomainError("lyapunov: E = -gamma0^2 is a removable point; perturb E");
    return 2.0 * ((w0 / kap) * ((w2 - 2 * E - g2) / den) * std::sinh(2 * kap * a) +
                  (1.0 - 2 * w2 / den) * std::cosh(2 * kap * a));
  }
  if (gamma0 == 0.0) return 2.0;
  return 2.0 * (w0 * (w2 - g2) / g2 * 2 * a + 1.0 - 2 * w2 / g2);
}

double lame_alpha_of(Complex a, const specfun::WeierstrassLattice& lat) {
  return (2.0 / 3.0) * (lat.m() + 1.0) - specfun::weierstrass_p(a, lat).real();
}

Complex lame_displacement_for(double alpha, const specfun::WeierstrassLattice& lat) {
  const double m = lat.m();
  const double target = (2.0 / 3.0) * (m + 1.0) - alpha;
  if (alpha < m) return specfun::invert_p_on_gap_segment(target, lat, {0});
  if (alpha >= 1.0 && alpha <= 1.0 + m) return specfun::invert_p_on_gap_segment(target, lat, {1});
  std::ostringstream os;
  os << "lame_displacement_for: alpha = " << alpha << " is not in a gap of the n=1 potential";
  throw RangeError(os.str());
}

namespace {

struct LameQuotient {
  std::shared_ptr<const specfun::WeierstrassLattice> lat;
  Complex a;
  Complex za;  // zeta(a)

  /// (R, R') with R = sigma(x + a + w') / sigma(x + w') e^{-zeta(a) x}
  std::pair<Complex, Complex> operator()(double x) const {
    const Complex wp = lat->omega_prime();
    const auto top = specfun::weierstrass_sigma_d(Complex(x) + a + wp, *lat);
    const auto bot = specfun::weierstrass_sigma_d(Complex(x) + wp, *lat);
    const Complex e = std::exp(-za * x);
    const Complex R = top.sigma / bot.sigma * e;
    const Complex dR =
        (top.dsigma / bot.sigma - top.sigma * bot.dsigma / (bot.sigma * bot.sigma) -
         za * top.sigma / bot.sigma) *
        e;
    return {R, dR};
  }
};

TransformationFunction lame_function(const LameQuotient& q, double alpha, double x0, double T,
                                     double beta, const std::string& tag) {
  const Complex R0 = q(x0).first;
  const double lb = std::log(std::abs(beta));
  return TransformationFunction(
      alpha,
      [q, x0, T, beta, lb, R0](double x) {
        const double n = std::floor((x - x0) / T);
        const double r = x - n * T;
        const auto [R, dR] = q(r);
        const double sign = (beta < 0 && std::fmod(std::abs(n), 2.0) == 1.0) ? -1.0 : 1.0;
        return ScaledState{sign * (R / R0).real(), sign * (dR / R0).real(), n * lb};
      },
      tag, Complex(beta, 0.0));
}

}  // namespace

LameBlochPair lame_bloch_analytic(const LameBlochParams& p) {
  if (p.n != 1) throw DomainError("analytic Lame Bloch functions are implemented for n = 1");
  auto lat = std::make_shared<const specfun::WeierstrassLattice>(specfun::EllipticParameter(p.m));
  const double w = lat->omega(), T = 2.0 * w;
  const double alpha = lame_alpha_of(p.a, *lat);
  const Complex za = specfun::weierstrass_zeta(p.a, *lat);
  const LameQuotient qp{lat, p.a, za}, qm{lat, -p.a, -za};

  // multiplier of the +a function over one real period
  const Complex bc = std::exp(2.0 * p.a * lat->eta() - 2.0 * w * za);
  if (std::abs(bc.imag()) > 1e-8 * std::abs(bc))
    throw RealityError("lame_bloch_analytic: multiplier is not real; a is not on a gap segment");
  const double beta = bc.real();

  double x0 = 0.0;
  if (p.x0) {
    x0 = *p.x0;
  } else {
    // first scan point where both quotients are well away from zero
    double big_p = 0.0, big_m = 0.0;
    for (int k = 0; k < 20; ++k) {
      big_p = std::max(big_p, std::abs(qp(0.05 * T * k).first));
      big_m = std::max(big_m, std::abs(qm(0.05 * T * k).first));
    }
    x0 = 0.1 * T;
    for (int k = 0; k < 20; ++k) {
      const double x = (0.1 + 0.05 * k) * T;
      if (std::abs(qp(x).first) > 1e-2 * big_p && std::abs(qm(x).first) > 1e-2 * big_m) {
        x0 = x;
        break;
      }
    }
  }

  // reality of the normalized quotients over one period
  for (const LameQuotient* q : {&qp, &qm}) {
    const Complex R0 = (*q)(x0).first;
    for (int k = 0; k < 32; ++k) {
      const Complex u = (*q)(x0 + T * k / 32.0).first / R0;
      if (std::abs(u.imag()) > 1e-8 * std::max(1.0, std::abs(u)))
        throw RealityError("lame_bloch_analytic: spurious imaginary part in a real regime");
    }
  }

  std::ostringstream tp, tm;
  tp << "lame-analytic(m=" << p.m << ",a=" << p.a << ")";
  tm << "lame-analytic(m=" << p.m << ",a=" << -p.a << ")";
  return {lame_function(qp, alpha, x0, T, beta, tp.str()),
          lame_function(qm, alpha, x0, T, 1.0 / beta, tm.str()), Complex(beta, 0.0), alpha, x0};
}

DisplacementSystem two_soliton_displacement(double g1, double g2, double g3, double g4) {
  for (double g : {g1, g2, g3, g4}) require_positive(g, "gamma");
  if (!(g1 < g2)) throw DomainError("two_soliton_displacement: needs gamma1 < gamma2");
  DisplacementSystem s{g1, g2, g3, g4, 0.0, 0.0, 0.0, DisplacementRegion::None};
  if (g3 < g1 && g4 < g1)
    s.region = DisplacementRegion::Omega1;
  else if (g3 > g1 && g4 > g1 && g3 < g2 && g4 < g2)
    s.region = DisplacementRegion::Omega2;
  else if (g3 > g2 && g4 > g2)
    s.region = DisplacementRegion::Omega3;
  const double G2 = (g1 * g1 - g3 * g3) * (g2 * g2 - g3 * g3) * (g1 * g1 - g4 * g4) *
                    (g2 * g2 - g4 * g4);
  s.Gamma = G2 >= 0.0 ? std::sqrt(G2) : std::nan("");
  s.deltaA = std::atanh(g1 * (g3 + g4) / (g1 * g1 + g3 * g4)) / g1;
  s.deltaB = std::atanh(g2 * (g3 + g4) / (g2 * g2 + g3 * g4)) / g2;
  return s;
}

ConsistentDisplacement find_consistent_displacement(double g1, double g2, double seed) {
  if (!(g1 < seed && seed < g2))
    throw DomainError("find_consistent_displacement: seed gamma3 must lie in (gamma1, gamma2)");
  auto f = [&](double g4) {
    const auto s = two_soliton_displacement(g1, g2, seed, g4);
    return s.deltaA - s.deltaB;
  };
  // deltaA -> +inf as gamma4 -> gamma1, deltaB -> +inf as gamma4 -> gamma2
  double eps = 1e-6 * (g2 - g1);
  double lo = g1 + eps, hi = g2 - eps;
  double flo = f(lo), fhi = f(hi);
  for (int k = 0; k < 8 && !(flo > 0 && fhi < 0); ++k) {
    eps *= 1e-2;
    lo = g1 + eps;
    hi = g2 - eps;
    flo = f(lo);
    fhi = f(hi);
  }
  if (!(flo > 0 && fhi < 0) || !std::isfinite(flo) || !std::isfinite(fhi))
    throw NoIntersection("find_consistent_displacement: no sign change along the gamma3 slice");
  std::uintmax_t iters = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) < 1e-15; };
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  const double g4 = 0.5 * (r.first + r.second);
  if (std::abs(g4 - seed) < 1e-6 * (g2 - g1))
    throw NoIntersection("find_consistent_displacement: solution coincides with gamma3 (degenerate)");
  const auto s = two_soliton_displacement(g1, g2, seed, g4);
  return {seed, g4, 0.5 * (s.deltaA + s.deltaB)};
}

TransformationFunction two_soliton_seed(double g1, double g2, double gk) {
  require_positive(gk, "gamma_k");
  make_two_soliton(g1, g2);
  std::ostringstream os;
  os << "two-soliton-seed(gamma=" << gk << ")";
  // W(u1, u2, u_k)/W12 with u1 = cosh g1 x, u2 = sinh g2 x, u_k = e^{-gk x}:
  // the second order intertwiner applied to u_k. Near-degenerate gammas
  // cancel heavily, so the ratios are formed in extended precision.
  return TransformationFunction(
      -gk * gk,
      [g1, g2, gk](double xd) {
        using R = long double;
        const R x = xd, a1 = -R(g1) * g1, a2 = -R(g2) * g2, E = -R(gk) * gk, da = a1 - a2;
        auto chs = [](R y) { return 0.5L * (1.0L + std::exp(-2.0L * std::fabs(y))); };
        auto shs = [](R y) { return std::copysign(0.5L * -std::expm1(-2.0L * std::fabs(y)), y); };
        const R p1 = chs(g1 * x), d1 = g1 * shs(g1 * x);
        const R p2 = shs(g2 * x), d2 = g2 * chs(g2 * x);
        const R W = p1 * d2 - d1 * p2;
        const R G = a1 * p1 * d2 - a2 * d1 * p2;
        const R Gp = da * d1 * d2;
        const R Wp = da * p1 * p2;
        const R Wpp = da * (d1 * p2 + p1 * d2);
        const R A = -E + G / W, B = -Wp / W;
        const R Ap = (Gp * W - G * Wp) / (W * W);
        const R Bp = -(Wpp / W - B * B);
        const R k = gk;
        const R phi = A + B * -k;
        const R dphi = Ap + (A + Bp) * -k - B * E;
        return ScaledState{double(phi), double(dphi), -gk * xd};
      },
      os.str());
}

ScaledValue two_soliton_w12(double g1, double g2, double x) {
  const double c1 = ch_scaled(g1 * x), s1 = sh_scaled(g1 * x);
  const double c2 = ch_scaled(g2 * x), s2 = sh_scaled(g2 * x);
  return {g2 * c1 * c2 - g1 * s1 * s2, (g1 + g2) * std::abs(x)};
}

ScaledValue two_soliton_displaced_wronskian(double g1, double g2, double g3, double g4,
                                            double delta, double x) {
  const auto s = two_soliton_displacement(g1, g2, g3, g4);
  const ScaledValue a = two_soliton_w12(g1, g2, x + delta), b = two_soliton_w12(g1, g2, x);
  return {(g3 - g4) * s.Gamma * a.value / b.value, -(g3 + g4) * x + a.log_scale - b.log_scale};
}

CollageTwoSoliton collage_two_soliton(double g1, double g2) {
  const PotentialSpec V = make_two_soliton(g1, g2);
  auto dV = [&](double x) {
    const double h = 1e-5;
    return (V(x + h) - V(x - h)) / (2 * h);
  };
  // first interior local minimum on (0, 60 / g1]
  const double step = 0.01, xmax = 60.0 / g1;
  double prev = V(step), cur = V(2 * step);
  for (double x = 2 * step; x + step < xmax; x += step) {
    const double next = V(x + step);
    if (cur < prev && cur <= next) {
      double lo = x - step, hi = x + step;
      double flo = dV(lo), fhi = dV(hi);
      if (flo * fhi > 0) {
        prev = cur;
        cur = next;
        continue;
      }
      std::uintmax_t iters = 200;
      auto tol = [](double a, double b) { return std::abs(b - a) < 1e-13; };
      const auto r = boost::math::tools::toms748_solve(dV, lo, hi, flo, fhi, tol, iters);
      const double a = 0.5 * (r.first + r.second);
      return {periodize(V, a), a};
    }
    prev = cur;
    cur = next;
  }
  throw MinimizationError("collage_two_soliton: no interior minimum of the well bracketed");
}

}  // namespace dbands::catalog
