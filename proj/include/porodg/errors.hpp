#pragma once

#include <stdexcept>
#include <string>

namespace porodg {

/// A linear or nonlinear solve could not be completed (singular pivot,
/// iteration budget exhausted, QR sweep budget exceeded, ...).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent run configuration. Carries the offending
/// line number of the config file when one is known (0 otherwise).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace porodg
