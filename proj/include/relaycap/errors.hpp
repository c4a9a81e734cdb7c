#pragma once

#include <stdexcept>
#include <string>

namespace relaycap {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A moment integral does not converge for the requested exponent.
class DivergentMoment : public Error {
public:
    explicit DivergentMoment(const std::string& msg) : Error(msg) {}
};

/// Quadrature or iteration failed to reach the requested tolerance.
class NumericalFailure : public Error {
public:
    explicit NumericalFailure(const std::string& msg) : Error(msg) {}
};

/// No sign change was found inside the requested root bracket.
class NoRootInBracket : public Error {
public:
    explicit NoRootInBracket(const std::string& msg) : Error(msg) {}
};

/// Too few usable thresholds for a tail-exponent regression.
class InsufficientTail : public Error {
public:
    explicit InsufficientTail(const std::string& msg) : Error(msg) {}
};

/// Invalid configuration input (bad field values, failed invariants).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

} // namespace relaycap
