#pragma once

#include <stdexcept>
#include <string>

namespace hdicho {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point was supplied outside the time domain J = (a0, +inf).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid argument combination (non-idempotent projector, L <= e*, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// A group power left the representable range of h.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: step-size underflow, non-finite values, rank ambiguity.
class NumericalError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public NumericalError {
public:
    IntegrationError(const std::string& what, double from, double to)
        : NumericalError(what + " on [" + std::to_string(from) + ", " + std::to_string(to) + "]"),
          from_(from), to_(to) {}

    double from() const noexcept { return from_; }
    double to() const noexcept { return to_; }

private:
    double from_;
    double to_;
};

class RankAmbiguityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// The coefficient does not satisfy the generalized Floquet condition.
class GfsViolation : public Error {
public:
    GfsViolation(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Configuration file could not be parsed or validated.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace hdicho
