#pragma once

#include <stdexcept>
#include <string>

namespace eqrl {

// A caller handed an operation input outside its documented domain.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A value became NaN/Inf: integrator blow-up or a diverging loss.
class NumericalFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A structural invariant (e.g. orthogonality of R) drifted past its bound.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace eqrl
