#pragma once

#include <stdexcept>
#include <string>

namespace narrowgap {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Division by zero, evaluation at a pole, or any other domain violation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Operands living in different neck dimensions.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Invalid arguments to a construction routine (bad alpha, missing level, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Linear solver failure; the message carries the residual report.
class SolverError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration or command-line input.
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace narrowgap
