#pragma once

#include <stdexcept>
#include <string>

namespace bgidx {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not deliver the promised accuracy.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Least-squares design without full column rank.
class RankDeficientError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Root finder could not bracket the requested value.
class NoBracketError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace bgidx
