#pragma once

#include <stdexcept>
#include <string>

namespace hsf {

// Shape/width mismatches and other precondition violations.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid values, config conflicts, malformed tables.
struct ValueError : std::runtime_error {
    explicit ValueError(const std::string& msg) : std::runtime_error(msg) {}
};

// File and container problems (missing, truncated, wrong magic).
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hsf
