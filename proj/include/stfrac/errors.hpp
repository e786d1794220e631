#pragma once

#include <stdexcept>
#include <string>

namespace stfrac {

// Error taxonomy used across the library. The CLI maps these to distinct
// process exit codes (domain=3, regime=4, numeric=5).

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Parameters fall outside the regime in which a result is proved/supported.
class RegimeError : public std::runtime_error {
public:
    explicit RegimeError(const std::string& what) : std::runtime_error(what) {}
};

/// Evaluation requested at a point where the quantity is infinite.
class PoleError : public DomainError {
public:
    explicit PoleError(const std::string& what) : DomainError(what) {}
};

/// Result exceeds representable range; carries a diagnostic.
class SaturationError : public std::range_error {
public:
    explicit SaturationError(const std::string& what) : std::range_error(what) {}
};

/// A defining integral or series diverges for the given parameters.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Generic numerical failure (non-convergence, loss of accuracy).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace stfrac
