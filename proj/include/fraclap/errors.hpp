#pragma once

#include <stdexcept>
#include <string>

namespace fraclap {

/// Raised when a quadrature or series cannot reach its requested tolerance.
class ToleranceNotReached : public std::runtime_error {
public:
    explicit ToleranceNotReached(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when vector or grid extents do not agree.
class ShapeMismatch : public std::invalid_argument {
public:
    explicit ShapeMismatch(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised by iterative solvers that neither converge nor have a fallback.
class NotConverged : public std::runtime_error {
public:
    explicit NotConverged(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fraclap
