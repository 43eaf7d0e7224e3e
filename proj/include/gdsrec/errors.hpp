#pragma once

#include <stdexcept>
#include <string>

namespace gdsrec {

// Bad run configuration or command-line usage. CLI exit code 1.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable, malformed, or inconsistent input data. CLI exit code 2.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken internal invariant (caller bug). CLI exit code 3.
struct InternalError : std::logic_error {
  explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace gdsrec
