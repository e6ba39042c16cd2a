#pragma once

#include <stdexcept>
#include <string>

namespace trirgnm {

/// Invalid user input (config files, sensor layouts, defect specifications).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: factorization breakdown, eigensolver stall, failed consistency check.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller broke a documented precondition (shape mismatch, inadmissible parameter, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace trirgnm
