#pragma once

#include <stdexcept>
#include <string>

namespace bghz {

/// Arguments outside the physical or numerical domain of an operation.
class InvalidConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A rational approximant evaluated too close to a zero of its denominator.
class PoleProximity : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A resummation or photon-number sum that failed to converge.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Projection of a state that carries no weight outside the vacuum.
class VacuumOnlyState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A threshold search whose bracket does not contain a crossing.
class NoCrossing : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bghz
