#pragma once

#include <stdexcept>
#include <string>

namespace primer {

/// Inputs violate an operation's preconditions or a config is inconsistent.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An input file does not match its declared format.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem failure (unreadable input, unwritable output).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Training produced non-finite values.
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace primer
