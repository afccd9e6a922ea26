#pragma once

#include <stdexcept>
#include <string>

namespace mtl {

// Error taxonomy mirrors the CLI exit codes: io=1, validation=2, config=3.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mtl
