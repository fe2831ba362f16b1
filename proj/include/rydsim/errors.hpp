#pragma once

#include <stdexcept>
#include <string>

namespace rydsim {

// Invalid physical/dimensional input (wrong basis size, non-Hermitian matrix, ...).
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Out-of-range or inconsistent parameter values.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Runtime numerical failure (non-convergence, degenerate solve).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad configuration file / unknown keys / schema violations.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace rydsim
