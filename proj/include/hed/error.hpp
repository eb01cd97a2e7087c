#pragma once

#include <stdexcept>
#include <string>

namespace hed {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration or input data: malformed files, ids out of bounds,
// inconsistent shapes, bad parameter values. CLI maps this to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Filesystem failures while reading or writing artifacts. Exit code 3.
class IoError : public Error {
public:
    using Error::Error;
};

// Training produced non-finite loss or parameters. Exit code 4.
class DivergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace hed
