#pragma once

#include <stdexcept>
#include <string>

namespace evatrap {

/// Broad failure classes. They map one-to-one onto the C API status codes
/// and the CLI exit codes.
enum class ErrorKind {
    config,   ///< malformed or inconsistent input document
    physics,  ///< resonance, missing guided mode, unusable state
    io,       ///< missing/corrupt files
    not_found,
    invalid_argument,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

struct PhysicsError : Error {
    explicit PhysicsError(const std::string& what) : Error(ErrorKind::physics, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& what)
        : Error(ErrorKind::invalid_argument, what) {}
};

}  // namespace evatrap
