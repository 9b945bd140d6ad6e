/// @file errors.hpp
/// @brief Error types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace nnpde {

/// Raised when a solver or iteration produces non-finite values.
/// CLI maps this to a distinct exit code from usage errors.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised for malformed configs, bad CLI input, or unreadable files.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace nnpde
