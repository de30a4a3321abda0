// Exception types separating malformed input from numerical failure.
#pragma once

#include <stdexcept>
#include <string>

namespace ockg {

// Malformed or inconsistent input data (files, streams, configs).
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numerical procedure failed (non-convergence, degenerate problem).
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ockg
