#pragma once

#include <stdexcept>
#include <string>

namespace posegen {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid inputs, malformed files, bad configuration. Maps to CLI exit code 1.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// Filesystem or serialization failure. Maps to CLI exit code 2.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

/// Numerical failure at runtime (divergence, non-finite state). CLI exit code 2.
class ComputeError : public Error {
public:
    explicit ComputeError(const std::string& msg) : Error(msg) {}
};

} // namespace posegen
