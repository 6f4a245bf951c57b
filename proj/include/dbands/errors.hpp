#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dbands {

// Base of every numeric failure raised by the library. `name()` is the
// stable identifier reported by the CLI in its JSON error payloads.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(what), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

#define DBANDS_DEFINE_ERROR(Type)                                     \
  class Type : public Error {                                         \
   public:                                                            \
    explicit Type(const std::string& what) : Error(#Type, what) {}    \
  };

DBANDS_DEFINE_ERROR(DomainError)
DBANDS_DEFINE_ERROR(PoleError)
DBANDS_DEFINE_ERROR(RangeError)
DBANDS_DEFINE_ERROR(IntegrationError)
DBANDS_DEFINE_ERROR(OverflowError)
DBANDS_DEFINE_ERROR(EdgeAmbiguity)
DBANDS_DEFINE_ERROR(EdgeDegeneracy)
DBANDS_DEFINE_ERROR(GridTooCoarse)
DBANDS_DEFINE_ERROR(NormalizationError)
DBANDS_DEFINE_ERROR(EnergyCollision)
DBANDS_DEFINE_ERROR(RealityError)
DBANDS_DEFINE_ERROR(NoIntersection)
DBANDS_DEFINE_ERROR(MinimizationError)
DBANDS_DEFINE_ERROR(FlatObjective)
DBANDS_DEFINE_ERROR(NotConverged)
DBANDS_DEFINE_ERROR(ZeroProduct)
DBANDS_DEFINE_ERROR(NotPeriodic)

#undef DBANDS_DEFINE_ERROR

// Raised when a transformation function (or Wronskian) vanishes inside the
// working window; carries the located nodes.
class SingularTransform : public Error {
 public:
  SingularTransform(const std::string& what, std::vector<double> nodes)
      : Error("SingularTransform", what), nodes_(std::move(nodes)) {}
  const std::vector<double>& nodes() const noexcept { return nodes_; }

 private:
  std::vector<double> nodes_;
};

}  // namespace dbands
