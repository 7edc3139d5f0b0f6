#pragma once

#include <stdexcept>
#include <string>

namespace egnli {

// Exit-code mapping used by the CLI: ConfigError -> 2, DataError (and
// subclasses) -> 3, TransportError -> 4.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

struct ParseError : DataError {
    using DataError::DataError;
};

struct ValidationError : DataError {
    using DataError::DataError;
};

struct TransportError : Error {
    using Error::Error;
};

}  // namespace egnli
