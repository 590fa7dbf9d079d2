#pragma once

#include <stdexcept>
#include <string>

namespace memnav {

// Invalid user input: bad config values, malformed files, unknown flags.
// The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failures during execution (I/O, numerical blow-ups, contract violations).
// The CLI maps this to exit code 2.
class RuntimeError : public std::runtime_error {
public:
    explicit RuntimeError(const std::string& msg) : std::runtime_error(msg) {}
};

// NaN/Inf detected in a computation.
class NumericalError : public RuntimeError {
public:
    explicit NumericalError(const std::string& msg) : RuntimeError(msg) {}
};

} // namespace memnav
