#pragma once

#include <stdexcept>

namespace cfmb {

// Invalid configuration value; the message starts with the offending key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent structure between otherwise valid inputs (shapes, partitions).
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation invoked in a state where it is not allowed.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace cfmb
