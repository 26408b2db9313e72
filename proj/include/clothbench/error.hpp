#pragma once

#include <stdexcept>
#include <string>

namespace clothbench {

// Base for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad argument or precondition violation.
class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

// NaN/Inf showed up in the integrator.
class SimulationDiverged : public Error {
public:
  SimulationDiverged(const std::string& what, int particle)
      : Error(what), particle_index(particle) {}
  int particle_index;
};

// Target unreachable or degenerate plan request.
class PlanningError : public Error {
public:
  explicit PlanningError(const std::string& what) : Error(what) {}
};

// Corner detection did not produce enough usable corners.
class PerceptionError : public Error {
public:
  explicit PerceptionError(const std::string& what) : Error(what) {}
};

// Config / file parse failure; message carries "file:line:" where known.
class ParseError : public Error {
public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

}  // namespace clothbench
