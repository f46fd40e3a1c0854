#pragma once

#include <stdexcept>
#include <string>

namespace dynbc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A coefficient field violated its sign constraint at a sampled point.
class CoefficientViolation : public Error {
public:
    using Error::Error;
};

/// Raised when an operation's documented precondition does not hold
/// (for example an exponential integrator fed a non-diagonal mass matrix).
class PreconditionError : public Error {
public:
    using Error::Error;
};

class UnsupportedSize : public Error {
public:
    using Error::Error;
};

class DegenerateStepsize : public Error {
public:
    using Error::Error;
};

/// Iterative or direct solver failure. Carries the last residual norm.
class SolverFailure : public Error {
public:
    SolverFailure(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Configuration problem. `line` is 0 when the error is not tied to a line.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace dynbc
