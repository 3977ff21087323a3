#pragma once
#include <stdexcept>

namespace tcar {

// Bad inputs or configuration the caller can fix.  The CLI maps this to exit code 2.
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An algorithm failed to produce a trustworthy result.  The CLI maps this to exit code 3.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tcar
