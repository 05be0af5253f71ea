#pragma once

#include <stdexcept>
#include <string>

namespace chmm {

// Error categories aligned with the CLI exit-code contract
// (1 usage/config, 2 data, 3 numerical).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace chmm
