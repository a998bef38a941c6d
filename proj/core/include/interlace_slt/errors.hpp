#pragma once

#include <stdexcept>
#include <string>

namespace risim {

// Contract violations (bad geometry, bad arguments).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Solver non-convergence and other numeric failures.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rejection/step budgets exhausted while sampling.
struct SamplingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A bounded computation ran out of its step budget.
struct TruncationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Config/file parsing problems (mapped to a dedicated CLI exit code).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace risim
