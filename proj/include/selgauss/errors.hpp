#pragma once

#include <stdexcept>

namespace selgauss {

// Invalid arguments: parameter-domain violations, malformed sets, bad config.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numerical failures: factorization breakdown, probability underflow,
// optimizer non-convergence, exhausted random streams.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace selgauss
