#pragma once

#include <stdexcept>
#include <string>

namespace qbm {

enum class ErrorKind {
  constraint_violation,
  subquantum_moments,
  breakdown,
  insufficient_data,
  aliasing,
  geometry,
  misuse,
  below_quantum_scale,
  irregular_cell,
  memory_budget,
  non_regular_evolution,
  degenerate_input,
  undefined_conditional,
  cost_guard,
  config,
  io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised when a Gaussian trajectory leaves the admissible parameter set.
class BreakdownError : public Error {
 public:
  BreakdownError(double time, const std::string& what)
      : Error(ErrorKind::breakdown, what), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace qbm
