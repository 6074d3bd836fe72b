#pragma once

#include <stdexcept>
#include <string>

namespace ylt {

// Bad network/layer description, shape mismatch, invalid option values.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed annotation files, manifests, weights files, unreadable images.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training aborted after exhausting the divergence-recovery budget.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace ylt
