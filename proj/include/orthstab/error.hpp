#pragma once

#include <stdexcept>
#include <string>

namespace orthstab {

/// Base class of every exception thrown by the library. Each subclass maps to
/// one CLI exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
    virtual const char* kind() const noexcept { return "internal"; }
};

/// Malformed input: mismatched rings, bad JSON, wrong arguments.
class UsageError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
    const char* kind() const noexcept override { return "usage"; }
};

/// Mathematically invalid request (non-unit inverse, no embedding exists, ...).
class DomainError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
    const char* kind() const noexcept override { return "domain"; }
};

class ShapeError : public DomainError {
public:
    using DomainError::DomainError;
    const char* kind() const noexcept override { return "shape"; }
};

class DegeneracyError : public DomainError {
public:
    using DomainError::DomainError;
    const char* kind() const noexcept override { return "degenerate"; }
};

/// An enumeration or elimination exceeded its configured work budget.
class BudgetExceeded : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
    const char* kind() const noexcept override { return "budget"; }
};

/// A checked mathematical property failed on a concrete instance.
class PropertyViolation : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 5; }
    const char* kind() const noexcept override { return "property"; }
};

/// A postcondition that should be guaranteed by construction failed.
class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace orthstab
