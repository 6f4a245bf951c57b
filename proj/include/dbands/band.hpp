#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "dbands/engine.hpp"

namespace dbands {

enum class EnergyRegion { InsideBand, InGap, AtEdge };

struct Classification {
  EnergyRegion region = EnergyRegion::InsideBand;
  int gap = -1;  // j for InGap, edge ordinal for AtEdge, -1 otherwise
};

struct FloquetData {
  double E = 0.0;
  double D = 0.0;
  std::complex<double> beta_plus;
  std::complex<double> beta_minus;
  Classification classification;
};

struct BandEdge {
  double E = 0.0;
  int index = 0;        // j of E_j / E_j'
  bool primed = false;  // upper edge of gap j
  double D = 0.0;
  std::string label() const;
};

struct BandStructure {
  std::vector<BandEdge> edges;
  Interval search_range{0.0, 0.0};
  PotentialSpec potential;
  double scan_step = 1e-3;
  /// Set when two edges lie closer than 10 scan steps (possibly a closed
  /// gap or an under-resolved pair).
  bool degenerate_warning = false;
  std::vector<std::string> warnings;

  std::vector<double> energies() const;
};

/// Tolerance on |D| - 2 under which an energy counts as a band edge.
inline constexpr double kEdgeTol = 1e-9;

/// D(E) = Tr b(T). V must carry a period.
double discriminant(const PotentialSpec& V, double E, double tol = kDefaultTol);

/// Roots of beta^2 - D beta + 1, |beta_plus| >= 1 in gaps.
std::pair<std::complex<double>, std::complex<double>> floquet_multipliers(double D);

/// Number of sign changes per period of the real Bloch solution at E
/// (|D(E)| > 2 required). Equals the gap index.
int gap_index_by_nodes(const PotentialSpec& V, double E);

BandStructure find_band_edges(const PotentialSpec& V, Interval range, double scan_step = 1e-3);

Classification classify_energy(const PotentialSpec& V, double E, const BandStructure& bands);

FloquetData floquet_data(const PotentialSpec& V, double E, const BandStructure& bands);

/// k in [0, pi/T] with 2 cos(kT) = D(E); DomainError outside bands.
double dispersion_k(const PotentialSpec& V, double E);

/// Period of V or DomainError.
double require_period(const PotentialSpec& V);

}  // namespace dbands
