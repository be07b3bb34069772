#pragma once

#include <stdexcept>
#include <string>

namespace clearance {

/// Raised for malformed input, violated preconditions and unreachable solver states.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace clearance
