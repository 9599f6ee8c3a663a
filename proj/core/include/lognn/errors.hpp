#pragma once

#include <stdexcept>
#include <string>

namespace lognn {

// Bad user-supplied configuration or file content. CLI exit code 1.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A computation produced or consumed a non-finite value. CLI exit code 2.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem failure. CLI exit code 3.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lognn
