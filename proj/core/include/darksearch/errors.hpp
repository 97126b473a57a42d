#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace darksearch {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration supplied by the caller.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A numerical procedure could not produce a trustworthy result.
class NumericalError : public Error {
public:
    using Error::Error;
};

class SingularLiouvillian : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DefectiveMatrix : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class QuadratureNotConverged : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NoCrossover : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class EmptyEnsemble : public Error {
public:
    using Error::Error;
};

/// Collects soft diagnostics (asymptotic formulas used outside their regime,
/// parameters outside the validated window). Functions accept a nullable sink.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string message) {
    if (sink) sink->push_back(std::move(message));
}

}  // namespace darksearch
