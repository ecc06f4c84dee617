#pragma once

#include <stdexcept>
#include <string>

namespace fineco {

// Error taxonomy mirrored by the CLI's exit codes: usage problems exit 1,
// I/O and file-format problems exit 2, numeric failures exit 3.

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fineco
