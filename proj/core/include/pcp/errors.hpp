#pragma once

#include <stdexcept>
#include <string>

namespace pcp {

/// Invalid configuration. The message names the violated constraint.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Operation invoked in a state that does not allow it (e.g. stepping a finished episode).
class StateError : public std::logic_error {
 public:
  explicit StateError(const std::string& what) : std::logic_error(what) {}
};

/// Failure while running (I/O, non-finite losses, corrupt checkpoints).
class RuntimeFailure : public std::runtime_error {
 public:
  explicit RuntimeFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pcp
