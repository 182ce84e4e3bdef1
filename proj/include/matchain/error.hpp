#pragma once

#include <stdexcept>
#include <string>

namespace matchain {

/// Operand shapes do not line up (matrix products, LP rows vs rhs, ...).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input violates a documented precondition (bad genotype, nonlinear objective, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Simplex exceeded its pivot budget; indicates numerical cycling.
class IterationLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simplex lost accuracy beyond recovery (non-finite values or an
/// infeasible final basis after refactorization).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exhaustive enumeration would exceed the configured sequence budget.
class BudgetExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed CSV / JSON input.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace matchain
