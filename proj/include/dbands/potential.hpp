#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dbands {

/// Pointwise evaluable potential supplied from outside the catalog
/// (Darboux-derived potentials implement this).
class PotentialFunction {
 public:
  virtual ~PotentialFunction() = default;
  virtual double operator()(double x) const = 0;
  /// Non-smooth points strictly inside (x0, x1); none by default.
  virtual std::vector<double> kinks(double /*x0*/, double /*x1*/) const { return {}; }
};

class PotentialSpec;

namespace potential {

struct Free {};
struct OneSoliton {
  double gamma0;
};
struct TwoSoliton {
  double gamma1;
  double gamma2;
};
struct Lame {
  int n;
  double m;
  double K;  // quarter period, cached
};
/// base truncated to [-a, a) and tiled with period 2a.
struct Collage {
  std::shared_ptr<const PotentialSpec> base;
  double half_width;
};
/// x -> base(x + delta)
struct Shifted {
  std::shared_ptr<const PotentialSpec> base;
  double delta;
};
/// Natural cubic spline through (grid, values).
struct Sampled {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> second;  // spline second derivatives
};
struct DarbouxDerived {
  std::shared_ptr<const PotentialFunction> fn;
  std::string label;
};

using Kind = std::variant<Free, OneSoliton, TwoSoliton, Lame, Collage, Shifted, Sampled,
                          DarbouxDerived>;

}  // namespace potential

/// Tagged descriptor of a one-dimensional potential V(x).
class PotentialSpec {
 public:
  PotentialSpec(potential::Kind kind, std::optional<double> period);

  double operator()(double x) const;
  const std::optional<double>& period() const noexcept { return period_; }
  const potential::Kind& kind() const noexcept { return kind_; }

  /// Points in (x0, x1) where V is not smooth (collage seams).
  std::vector<double> kinks(double x0, double x1) const;

  /// Short human readable descriptor, e.g. "lame(n=1,m=0.5)".
  std::string describe() const;

 private:
  potential::Kind kind_;
  std::optional<double> period_;
};

PotentialSpec make_free(std::optional<double> period = std::nullopt);
PotentialSpec make_sampled(std::vector<double> grid, std::vector<double> values,
                           std::optional<double> period = std::nullopt);
PotentialSpec make_shifted(const PotentialSpec& base, double delta);
PotentialSpec make_darboux_derived(std::shared_ptr<const PotentialFunction> fn,
                                   std::string label, std::optional<double> period);

}  // namespace dbands
