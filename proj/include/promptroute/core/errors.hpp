#pragma once

#include <stdexcept>
#include <string>

namespace promptroute::core {

// Input stream could not be opened or read.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input was readable but malformed or violated an invariant.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration or argument problem detected before any work started.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace promptroute::core
