#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gauge_rig {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A framework or configuration violates one of its invariants.
class InvalidFramework : public Error {
 public:
  using Error::Error;
};

/// Input document could not be parsed or does not match the schema.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Degenerate geometry (e.g. a rod of zero length) made a quantity undefined.
class DegenerateConfiguration : public Error {
 public:
  using Error::Error;
};

/// A linear system has no solution: the right-hand side has a component
/// along the self-stress space.
class Unsolvable : public Error {
 public:
  Unsolvable(const std::string& what, double violation)
      : Error(what), violation_(violation) {}
  double violation() const { return violation_; }

 private:
  double violation_;
};

/// Newton projection did not converge or the point was outside its basin.
class ProjectionFailure : public Error {
 public:
  using Error::Error;
};

/// Time integration aborted; carries the step at which it failed.
class IntegrationFailure : public Error {
 public:
  IntegrationFailure(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Gauge fixing surface is not transversal to the gauge directions.
class GaugeFixingFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace gauge_rig
