#pragma once

#include <stdexcept>
#include <string>

namespace decum {

// Error categories map to CLI exit codes: config 2, data 3, numerics 4.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericsError : std::runtime_error {
    explicit NumericsError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace decum
