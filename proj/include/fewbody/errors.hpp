#ifndef FEWBODY_ERRORS_HPP
#define FEWBODY_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fewbody {

// Bad arguments or malformed data handed to an operation.
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A grid/quadrature could not meet the requested accuracy.
struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every overlap eigenvalue fell below the conditioning cutoff.
struct DegenerateBasisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Partial-wave tail was still growing at the requested l_max.
struct LmaxInsufficientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A bracketing/bisection run could not be completed at the given budget.
struct BudgetInsufficientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Preconditions of a verified bound do not hold for this state.
struct BoundPreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace fewbody

#endif
