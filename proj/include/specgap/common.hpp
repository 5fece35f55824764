#pragma once

#include <stdexcept>
#include <string>

namespace specgap {

// Raised when inputs violate a documented precondition or schema.
// The CLI maps this to exit code 2.
struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a certified property fails while an operation depends on it
// (semigroup certificate violated, bound dominance broken, non-convergence).
// The CLI maps this to exit code 3.
struct certificate_error : std::runtime_error {
    explicit certificate_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace specgap
