#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bbmlab {

/// Parameters outside the documented domain of an operation.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or incomplete scenario configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * A grid too coarse for the requested construction or kernel scale.
 * `required_cells` is the smallest cell count that would be accepted.
 */
class ResolutionError : public std::runtime_error {
public:
    ResolutionError(const std::string& what, std::size_t required_cells)
        : std::runtime_error(what), required_cells_(required_cells) {}

    std::size_t required_cells() const noexcept { return required_cells_; }

private:
    std::size_t required_cells_;
};

}  // namespace bbmlab
