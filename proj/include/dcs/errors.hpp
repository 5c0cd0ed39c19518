#pragma once

#include <stdexcept>
#include <string>

namespace dcs {

// Error categories map onto CLI exit codes: config -> 1, io -> 2, numeric -> 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace dcs
