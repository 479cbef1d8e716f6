#pragma once

#include <stdexcept>
#include <string>

namespace reclda {

/// Bad input data: malformed files, empty corpora, inconsistent traces.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid arguments or configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace reclda
