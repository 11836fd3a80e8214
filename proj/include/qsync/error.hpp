#pragma once

#include <stdexcept>
#include <string>

namespace qsync {

/// Raised when an argument violates a documented precondition.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a solver produces non-finite values or cannot make progress.
class SolverDivergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace qsync
