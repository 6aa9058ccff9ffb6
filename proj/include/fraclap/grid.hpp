#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace fraclap {

/// Fractional exponent s of (-Delta)^s, restricted to (0, 1/2) U (1/2, 1).
class FracOrder {
public:
    explicit FracOrder(double s) : s_(s) {
        if (!(s > 0.0 && s < 1.0) || !std::isfinite(s)) {
            throw std::domain_error("fractional order s must lie in (0, 1), got " + std::to_string(s));
        }
        if (std::abs(s - 0.5) < 1e-12) {
            throw std::domain_error("fractional order s = 0.5 is excluded: the splitting constant c_{1,s-1} is singular");
        }
    }

    [[nodiscard]] double value() const noexcept { return s_; }
    /// Exponent 1 - 2s of the 1D kernel |x - y|^{1-2s}.
    [[nodiscard]] double kernel_exponent_1d() const noexcept { return 1.0 - 2.0 * s_; }

    friend bool operator==(const FracOrder&, const FracOrder&) = default;

private:
    double s_;
};

/// Uniform mesh over [-L, L] with N subintervals, nodes x_i = -L + i h, i = 0..N.
struct Grid1D {
    double L;
    int N;

    Grid1D(double half_width, int subdivisions) : L(half_width), N(subdivisions) {
        if (!(half_width > 0.0) || !std::isfinite(half_width)) {
            throw std::domain_error("grid half-width L must be positive");
        }
        if (subdivisions < 4) {
            throw std::domain_error("grid needs N >= 4 subintervals, got " + std::to_string(subdivisions));
        }
    }

    [[nodiscard]] double h() const noexcept { return 2.0 * L / N; }
    [[nodiscard]] double node(int i) const noexcept { return -L + i * h(); }
    [[nodiscard]] std::size_t interior_size() const noexcept { return static_cast<std::size_t>(N - 1); }
};

/// Square mesh over [-L, L]^2, nodes (x_i, y_j) = (-L + i h, -L + j h), i, j = 0..N.
/// Interior unknowns are stored row-major in i: index (i - 1) * (N - 1) + (j - 1).
struct Grid2D {
    double L;
    int N;

    Grid2D(double half_width, int subdivisions) : L(half_width), N(subdivisions) {
        if (!(half_width > 0.0) || !std::isfinite(half_width)) {
            throw std::domain_error("grid half-width L must be positive");
        }
        if (subdivisions < 4) {
            throw std::domain_error("grid needs N >= 4 subintervals, got " + std::to_string(subdivisions));
        }
    }

    [[nodiscard]] double h() const noexcept { return 2.0 * L / N; }
    [[nodiscard]] double node(int i) const noexcept { return -L + i * h(); }
    [[nodiscard]] std::size_t interior_side() const noexcept { return static_cast<std::size_t>(N - 1); }
    [[nodiscard]] std::size_t interior_size() const noexcept { return interior_side() * interior_side(); }
    /// Flat index of interior node (i, j), 1 <= i, j <= N - 1.
    [[nodiscard]] std::size_t interior_index(int i, int j) const noexcept {
        return static_cast<std::size_t>(i - 1) * interior_side() + static_cast<std::size_t>(j - 1);
    }
};

}  // namespace fraclap
