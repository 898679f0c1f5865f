#pragma once

#include <stdexcept>
#include <string>

namespace coopgrow {

/// Invalid configuration, parameters, or input files. The CLI maps this to
/// exit code 2; everything else is a runtime failure.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace coopgrow
