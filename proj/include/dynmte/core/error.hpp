#pragma once

#include <stdexcept>
#include <string>

namespace dynmte {

/// Base of every error raised by the library. The message is prefixed with the
/// name of the module that raised it.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& message)
        : std::runtime_error(module + ": " + message), module_(std::move(module)) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

/// Bad input: malformed files, out-of-range configuration, contract violations.
class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A computation that could not produce a usable number.
class NumericalError : public Error {
public:
    using Error::Error;
};

class SeparationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class RankError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InsufficientSupportError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class BootstrapFailure : public NumericalError {
public:
    BootstrapFailure(const std::string& message, long attempts, long failures)
        : NumericalError("mtr-effects", message), attempts_(attempts), failures_(failures) {}

    long attempts() const noexcept { return attempts_; }
    long failures() const noexcept { return failures_; }

private:
    long attempts_;
    long failures_;
};

}  // namespace dynmte
