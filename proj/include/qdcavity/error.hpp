#pragma once

#include <stdexcept>

namespace qdc {

// Invalid inputs are reported with std::invalid_argument (or std::domain_error
// where an input is valid but physically meaningless). Failures of a numerical
// method on valid input throw NumericError.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qdc
