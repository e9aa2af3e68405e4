#pragma once

#include <stdexcept>
#include <string>

namespace navgspn {

// Bad input: malformed files, invalid models, caller misuse. CLI exit code 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure: singular systems, no absorption. CLI exit code 2.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Firing a transition that is not enabled.
struct NotEnabledError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace navgspn
