#ifndef HSD_ERRORS_HPP
#define HSD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hsd {

// Error categories map onto CLI exit codes: config=1, data=2, numeric=3.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace hsd

#endif
