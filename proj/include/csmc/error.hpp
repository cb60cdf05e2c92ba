#pragma once

#include <stdexcept>
#include <string>

namespace csmc {

/// Invalid or inconsistent run configuration. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The rational-expectations solver could not produce a determinate solution.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pushout construction failed (missing label, unresolvable factor endpoint, non-local factor).
class CompositionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (unnormalised weights, malformed trajectory, ...).
class ContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A salience lens assigned zero weight to every particle.
class EmptySupportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output directory missing, unwritable, or a write failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace csmc
