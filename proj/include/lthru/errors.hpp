#pragma once

#include <stdexcept>
#include <string>

namespace lthru {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A propagation/traffic model that cannot be used for the requested quantity
// (e.g. a custom channel whose moment is not finite).
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Requested evaluation mode is not defined for the given model.
class UnsupportedModeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed run configuration. `field` is the JSON path of the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace lthru
