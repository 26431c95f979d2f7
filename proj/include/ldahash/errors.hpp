#pragma once

#include <stdexcept>
#include <string>

namespace ldahash {

// Validation failures: malformed inputs, bad dimensions, infeasible configs.
// The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Numeric failures: indefiniteness, non-convergence, non-finite values.
// The CLI maps these to exit code 2.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotPositiveDefiniteError : public NumericError {
public:
    NotPositiveDefiniteError(const std::string& what, std::size_t pivot)
        : NumericError(what), pivot_index(pivot) {}
    std::size_t pivot_index;
};

class SingularityError : public NumericError {
public:
    using NumericError::NumericError;
};

class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, double residual)
        : NumericError(what), residual(residual) {}
    double residual;
};

class DivergenceError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace ldahash
