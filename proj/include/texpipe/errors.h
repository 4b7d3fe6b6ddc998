#pragma once

#include <stdexcept>
#include <string>

namespace texpipe {

// Bad inputs: malformed files, invalid parameters, broken mesh invariants.
struct input_error : std::runtime_error {
  explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// Computation failed: solver divergence, non-finite values.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace texpipe
