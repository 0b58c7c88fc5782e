#pragma once

#include <stdexcept>

namespace runsx {

// Raised when the data admit no meaningful test (one sign class only,
// all residuals zero, zero-variance statistic, ...). The CLI maps this
// to its own exit code so scripts can tell bad data from bad usage.
struct degenerate_data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace runsx
