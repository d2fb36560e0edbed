#pragma once

#include <stdexcept>
#include <string>

namespace isacwave {

/// An invalid or inconsistent configuration value. Messages start with the
/// offending field name so that command-line diagnostics can point at it.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace isacwave
