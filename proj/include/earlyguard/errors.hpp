#pragma once

#include <stdexcept>
#include <string>

namespace earlyguard {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A referenced file is missing or unreadable. CLI exit code 3.
class FileError : public Error {
public:
    explicit FileError(const std::string& msg) : Error(msg) {}
};

/// Input data or arguments violate a documented contract. CLI exit code 4.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// An experiment failed at runtime (degenerate data, numeric blow-up).
/// CLI exit code 5.
class ExperimentError : public Error {
public:
    explicit ExperimentError(const std::string& msg) : Error(msg) {}
};

}  // namespace earlyguard
