#include "dbands/band.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "dbands/errors.hpp"
#include "dbands/parallel.hpp"

namespace dbands {

namespace {

struct RawEdge {
  double E;
  double D;
  bool coincident;  // member of a closed-gap pair
};

double refine_root(const PotentialSpec& V, double level, double a, double b, double fa,
                   double fb) {
  auto f = [&](double E) { return discriminant(V, E) - level; };
  std::uintmax_t iters = 100;
  auto tol = [](double lo, double hi) { return std::abs(hi - lo) < 2e-11; };
  const auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace

std::string BandEdge::label() const {
  std::ostringstream os;
  os << "E" << index << (primed ? "'" : "");
  return os.str();
}

std::vector<double> BandStructure::energies() const {
  std::vector<double> out;
  out.reserve(edges.size());
  for (const auto& e : edges) out.push_back(e.E);
  return out;
}

double require_period(const PotentialSpec& V) {
  if (!V.period()) throw DomainError("potential " + V.describe() + " is not periodic");
  return *V.period();
}

double discriminant(const PotentialSpec& V, double E, double tol) {
  const double T = require_period(V);
  return transfer_matrix(V, E, 0.0, T, tol).trace();
}

std::pair<std::complex<double>, std::complex<double>> floquet_multipliers(double D) {
  using C = std::complex<double>;
  const double h = 0.5 * D;
  const double disc = h * h - 1.0;
  if (disc >= 0.0) {
    // larger root first, product exactly one in the formula
    const double r = std::sqrt(disc);
    const double big = h >= 0 ? h + r : h - r;
    return {C(big, 0.0), C(1.0 / big, 0.0)};
  }
  const double s = std::sqrt(-disc);
  return {C(h, s), C(h, -s)};
}

int gap_index_by_nodes(const PotentialSpec& V, double E) {
  const double T = require_period(V);
  const TransferMatrix b = transfer_matrix(V, E, 0.0, T);
  const double D = b.trace();
  if (std::abs(D) < 2.0 - 1e-6) {
    std::ostringstream os;
    os << "gap_index_by_nodes: E = " << E << " lies inside a band (D = " << D << ")";
    throw DomainError(os.str());
  }
  const double beta = std::abs(D) >= 2.0 ? floquet_multipliers(D).first.real() : (D > 0 ? 1.0 : -1.0);
  StateVector v1{b.b12, beta - b.b11}, v2{beta - b.b22, b.b21};
  const double n1 = std::hypot(v1.psi, v1.dpsi), n2 = std::hypot(v2.psi, v2.dpsi);
  StateVector v = n1 >= n2 ? v1 : v2;
  if (std::max(n1, n2) < 1e-12) v = {1.0, 0.0};
  constexpr int kSamples = 512;
  std::vector<double> grid(kSamples + 1);
  for (int i = 0; i <= kSamples; ++i) grid[i] = T * i / kSamples;
  const SampledSolution s = solve_on_grid(V, E, 0.0, v, std::move(grid));
  int changes = 0;
  double last = 0.0;
  for (double p : s.psi) {
    if (p == 0.0) continue;
    if (last != 0.0 && (p > 0) != (last > 0)) ++changes;
    last = p;
  }
  return changes;
}

BandStructure find_band_edges(const PotentialSpec& V, Interval range, double scan_step) {
  require_period(V);
  if (!(range.hi > range.lo)) throw DomainError("find_band_edges: empty range");
  if (!(scan_step > 0.0)) throw DomainError("find_band_edges: scan step must be positive");
  const auto n = static_cast<std::size_t>(std::ceil(range.length() / scan_step));
  std::vector<double> Es(n + 1);
  for (std::size_t i = 0; i <= n; ++i) Es[i] = range.lo + range.length() * double(i) / double(n);
  Es[n] = range.hi;
  const std::vector<double> Ds =
      parallel_map<double>(n + 1, [&](std::size_t i) { return discriminant(V, Es[i]); });

  std::vector<RawEdge> raw;
  std::vector<char> crossed(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (double level : {2.0, -2.0}) {
      const double fa = Ds[i] - level, fb = Ds[i + 1] - level;
      if (fa == 0.0) {
        raw.push_back({Es[i], Ds[i], false});
        crossed[i] = 1;
      } else if (fa * fb < 0.0) {
        raw.push_back({refine_root(V, level, Es[i], Es[i + 1], fa, fb), level, false});
        crossed[i] = 1;
      }
    }
  }
  if (Ds[n] == 2.0 || Ds[n] == -2.0) raw.push_back({Es[n], Ds[n], false});

  // Extrema of D close to +-2 with no sign change nearby: narrow or closed gaps
  // that slipped between samples.
  for (std::size_t i = 1; i < n; ++i) {
    const double d1 = Ds[i] - Ds[i - 1], d2 = Ds[i + 1] - Ds[i];
    const bool is_max = d1 > 0 && d2 < 0 && Ds[i] > 1.0 && Ds[i] < 2.0;
    const bool is_min = d1 < 0 && d2 > 0 && Ds[i] < -1.0 && Ds[i] > -2.0;
    if (!(is_max || is_min) || crossed[i - 1] || crossed[i]) continue;
    const double sgn = is_max ? 1.0 : -1.0, level = 2.0 * sgn;
    auto neg = [&](double E) { return -sgn * discriminant(V, E); };
    const auto [Em, fm] = boost::math::tools::brent_find_minima(neg, Es[i - 1], Es[i + 1], 40);
    const double Dm = -sgn * fm;
    const double excess = sgn * (Dm - level);
    if (excess < -1e-8) continue;
    if (excess <= 1e-9) {
      raw.push_back({Em, Dm, true});
      raw.push_back({Em, Dm, true});
      continue;
    }
    const double fl = Ds[i - 1] - level, fr = Ds[i + 1] - level, fmid = Dm - level;
    raw.push_back({refine_root(V, level, Es[i - 1], Em, fl, fmid), level, false});
    raw.push_back({refine_root(V, level, Em, Es[i + 1], fmid, fr), level, false});
  }

  std::sort(raw.begin(), raw.end(), [](const RawEdge& a, const RawEdge& b) { return a.E < b.E; });
  std::vector<RawEdge> edges;
  for (const auto& r : raw) {
    if (!edges.empty() && !r.coincident && !edges.back().coincident &&
        std::abs(r.E - edges.back().E) < 1e-9)
      continue;
    edges.push_back(r);
  }

  BandStructure out{{}, range, V, scan_step, false, {}};
  if (edges.empty()) return out;

  int p = 0;  // ordinal: 0 -> E0, 2j-1 -> Ej, 2j -> Ej'
  // node count just inside the gap next to the first edge; on steep D the
  // refined root itself may sit a hair inside the band
  int j0 = -1;
  const double E0 = edges.front().E;
  const double reach = edges.size() > 1 ? 0.5 * (edges[1].E - E0) : scan_step;
  for (double h = 1e-10; j0 < 0 && h <= reach; h *= 10.0) {
    for (double probe : {E0 - h, E0 + h}) {
      if (std::abs(discriminant(V, probe)) > 2.0) {
        j0 = gap_index_by_nodes(V, probe);
        break;
      }
    }
  }
  if (j0 < 0) j0 = gap_index_by_nodes(V, E0);
  if (j0 > 0) {
    bool gap_below = false;
    if (!edges.front().coincident) {
      const double Db = discriminant(V, edges.front().E - 1e-7);
      gap_below = std::abs(Db) > 2.0;
    }
    p = gap_below ? 2 * j0 : 2 * j0 - 1;
  }
  for (const auto& e : edges) {
    BandEdge be;
    be.E = e.E;
    be.D = discriminant(V, e.E);
    be.index = (p + 1) / 2;
    be.primed = p > 0 && p % 2 == 0;
    out.edges.push_back(be);
    ++p;
  }
  for (std::size_t k = 1; k < out.edges.size(); ++k) {
    if (out.edges[k].E - out.edges[k - 1].E < 10.0 * scan_step) {
      out.degenerate_warning = true;
      std::ostringstream os;
      os << "WarningDegenerate: edges " << out.edges[k - 1].label() << " and "
         << out.edges[k].label() << " closer than 10 scan steps";
      out.warnings.push_back(os.str());
    }
  }
  return out;
}

Classification classify_energy(const PotentialSpec& V, double E, const BandStructure& bands) {
  const double D = discriminant(V, E);
  if (std::abs(std::abs(D) - 2.0) < kEdgeTol) {
    std::ostringstream os;
    os << "E = " << E << " is within tolerance of a band edge (D = " << D << ")";
    throw EdgeAmbiguity(os.str());
  }
  if (std::abs(D) < 2.0) return {EnergyRegion::InsideBand, -1};

  int j = -1;
  const auto& ed = bands.edges;
  if (!ed.empty()) {
    auto it = std::upper_bound(ed.begin(), ed.end(), E,
                               [](double e, const BandEdge& b) { return e < b.E; });
    if (it == ed.begin()) {
      if (ed.front().index == 0) j = 0;
    } else {
      const BandEdge& below = *(it - 1);
      if (!below.primed && below.index > 0 && it != ed.end() && it->primed &&
          it->index == below.index)
        j = below.index;
    }
  }
  // sign convention: even gaps have D > 2, odd gaps D < -2
  if (j < 0 || (j % 2 == 0) != (D > 0)) j = gap_index_by_nodes(V, E);
  return {EnergyRegion::InGap, j};
}

FloquetData floquet_data(const PotentialSpec& V, double E, const BandStructure& bands) {
  FloquetData f;
  f.E = E;
  f.D = discriminant(V, E);
  std::tie(f.beta_plus, f.beta_minus) = floquet_multipliers(f.D);
  try {
    f.classification = classify_energy(V, E, bands);
  } catch (const EdgeAmbiguity&) {
    f.classification = {EnergyRegion::AtEdge, -1};
  }
  return f;
}

double dispersion_k(const PotentialSpec& V, double E) {
  const double T = require_period(V);
  const double D = discriminant(V, E);
  if (std::abs(D) >= 2.0) {
    std::ostringstream os;
    os << "dispersion_k: E = " << E << " is not inside a band (D = " << D << ")";
    throw DomainError(os.str());
  }
  return std::acos(0.5 * D) / T;
}

}  // namespace dbands
