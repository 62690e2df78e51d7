#pragma once

#include <stdexcept>
#include <string>

namespace conjlab {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Inconsistent or invalid configuration (spec/variant mismatch, bad keys, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A request that is well formed but cannot be carried out at the requested
/// budget or accuracy. Carries a human-readable suggestion.
class FeasibilityError : public Error {
public:
    FeasibilityError(const std::string& what, std::string advice)
        : Error(what), advice_(std::move(advice)) {}

    const std::string& advice() const noexcept { return advice_; }

private:
    std::string advice_;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class CovarianceNotPsdError : public Error {
public:
    using Error::Error;
};

class ModelInconsistencyError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

} // namespace conjlab
