#pragma once

// Stencil weights of the split discretization (-Delta)_h (-Delta)_h^{s-1}.
//
// omega_bar are the hat-function moments of the weakly singular kernel of
// (-Delta)^{s-1}; w is their discrete Laplacian. Only the k >= 0 quadrant is
// stored; the weights are even in every index.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraclap/errors.hpp"
#include "fraclap/grid.hpp"
#include "fraclap/parallel.hpp"
#include "fraclap/quadrature.hpp"

namespace fraclap {

/// Normalizing constant c_{n,s'} of the integral operator (-Delta)^{s'}.
/// For 0 < s' < 1 this is the hypersingular constant; for s' < 0 the
/// weakly singular one, which carries an extra leading minus sign.
[[nodiscard]] inline double splitting_constant(int n, double sp) {
    if (n != 1 && n != 2) throw std::domain_error("splitting_constant: dimension must be 1 or 2");
    if (sp == 0.0 || !std::isfinite(sp)) throw std::domain_error("splitting_constant: s' = 0 is not admissible");
    if (sp >= 1.0) throw std::domain_error("splitting_constant: s' must be < 1");
    const double top_arg = 0.5 * n + sp;
    if (top_arg <= 0.0 && top_arg == std::nearbyint(top_arg)) {
        throw std::domain_error("splitting_constant: Gamma(n/2 + s') has a pole at s' = " + std::to_string(sp));
    }
    const double magnitude = std::pow(2.0, 2.0 * sp) * sp * std::tgamma(top_arg) /
                             (std::pow(std::numbers::pi, 0.5 * n) * std::tgamma(1.0 - sp));
    if (!std::isfinite(magnitude)) throw std::domain_error("splitting_constant: non-finite value");
    return sp > 0.0 ? magnitude : -magnitude;
}

namespace detail {

/// Central difference of order 2 or 4 of m -> |m|^p, evaluated at integer k >= 0.
/// Far from the origin the direct sum cancels catastrophically, so a binomial
/// expansion in 1/k is summed instead.
inline double power_central_difference(double p, long k, int order) {
    if (order != 2 && order != 4) throw std::invalid_argument("central difference order must be 2 or 4");
    constexpr long series_threshold = 8;
    if (k < series_threshold) {
        auto g = [p](long m) { return m == 0 ? 0.0 : std::pow(static_cast<double>(m < 0 ? -m : m), p); };
        if (order == 2) return g(k - 1) - 2.0 * g(k) + g(k + 1);
        return g(k - 2) - 4.0 * g(k - 1) + 6.0 * g(k) - 4.0 * g(k + 1) + g(k + 2);
    }
    const double kd = static_cast<double>(k);
    const double inv_k2 = 1.0 / (kd * kd);
    double binom = 1.0;  // binom(p, n)
    double inv_pow = 1.0;  // k^{-n}
    double sum = 0.0;
    for (int n = 1; n <= 400; ++n) {
        binom *= (p - n + 1) / n;
        if (n % 2 == 1) continue;
        inv_pow *= inv_k2;
        // sum over the stencil of coefficient * r^n
        const double moment = order == 2 ? 2.0 : std::ldexp(1.0, n + 1) - 8.0;
        const double term = binom * moment * inv_pow;
        sum += term;
        if (n > order && std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    return std::pow(kd, p) * sum;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// One dimension
// ---------------------------------------------------------------------------

/// omega_bar_k = c_{1,s-1} int_{-h}^{h} |k h - y|^{1-2s} (1 - |y|/h) dy, in closed form.
[[nodiscard]] inline double omega_bar_1d(long k, double h, FracOrder s) {
    if (!(h > 0.0)) throw std::domain_error("omega_bar_1d: h must be positive");
    if (k < 0) k = -k;
    const double sv = s.value();
    const double p = 3.0 - 2.0 * sv;
    const double scale = splitting_constant(1, sv - 1.0) * std::pow(h, 2.0 - 2.0 * sv) / ((2.0 - 2.0 * sv) * p);
    return scale * detail::power_central_difference(p, k, 2);
}

enum class Correction {
    none,       ///< plain weights w_k = (-Delta)_h omega_bar_k
    automatic,  ///< zero omega_bar_0 whenever the plain w_1 is nonnegative
};

/// 1D stencil. omega_bar holds k = 0..N (uncorrected); w holds the weights in
/// use, k = 0..N-2. If modified is set, omega_bar_0 was replaced by zero.
struct WeightKernel1D {
    FracOrder s;
    Grid1D grid;
    std::vector<double> omega_bar;
    std::vector<double> w;
    bool modified = false;

    [[nodiscard]] double h() const noexcept { return grid.h(); }
    [[nodiscard]] int N() const noexcept { return grid.N; }
    /// omega_bar entering the composed weights, after any correction.
    [[nodiscard]] double omega_bar_effective(long k) const {
        if (k < 0) k = -k;
        return (modified && k == 0) ? 0.0 : omega_bar.at(static_cast<std::size_t>(k));
    }
    /// sum_{i=-(N-1)}^{N-1} of the uncorrected w_i; equals 2 (omega_bar_{N-1} - omega_bar_N) / h^2.
    [[nodiscard]] double full_stencil_sum() const {
        const double sv = s.value();
        const double p = 3.0 - 2.0 * sv;
        const double scale = -splitting_constant(1, sv - 1.0) * std::pow(h(), -2.0 * sv) / ((2.0 - 2.0 * sv) * p);
        double sum = 0.0;
        for (long k = N() - 1; k >= 1; --k) sum += 2.0 * scale * detail::power_central_difference(p, k, 4);
        return sum + scale * detail::power_central_difference(p, 0, 4);
    }
};

/// Builds omega_bar and the composed weights w for the grid; applies the
/// omega_bar_0 correction when requested and the plain w_1 is nonnegative.
[[nodiscard]] inline WeightKernel1D weights_1d(const Grid1D& grid, FracOrder s,
                                               Correction correction = Correction::automatic) {
    const int N = grid.N;
    const double h = grid.h();
    const double sv = s.value();
    const double p = 3.0 - 2.0 * sv;
    const double c = splitting_constant(1, sv - 1.0);
    const double omega_scale = c * std::pow(h, 2.0 - 2.0 * sv) / ((2.0 - 2.0 * sv) * p);
    const double w_scale = -c * std::pow(h, -2.0 * sv) / ((2.0 - 2.0 * sv) * p);

    WeightKernel1D kernel{s, grid, std::vector<double>(static_cast<std::size_t>(N) + 1),
                          std::vector<double>(static_cast<std::size_t>(N) - 1), false};
    for (int k = 0; k <= N; ++k) kernel.omega_bar[k] = omega_scale * detail::power_central_difference(p, k, 2);
    for (int k = 0; k <= N - 2; ++k) kernel.w[k] = w_scale * detail::power_central_difference(p, k, 4);

    if (correction == Correction::automatic && kernel.w[1] >= 0.0) {
        const auto& om = kernel.omega_bar;
        kernel.modified = true;
        kernel.w[0] = -(2.0 * om[1]) / (h * h);
        kernel.w[1] = -(0.0 - 2.0 * om[1] + om[2]) / (h * h);
    }
    return kernel;
}

// ---------------------------------------------------------------------------
// Two dimensions
// ---------------------------------------------------------------------------

/// Quadrature settings for the 2D weights and the exterior integrals.
struct QuadratureConfig {
    int gauss_order = 10;    ///< per-cell tensor Gauss order; angular order at singular corners
    int grading_depth = 12;  ///< maximum refinement levels
    double tol = 1e-12;      ///< relative tolerance for the adaptive pieces
};

namespace detail {

/// Bilinear hat-corner moments of r^{-2s} over the unit cell [a, a+1] x [b, b+1]:
/// m[ix][iy] = int r^{-2s} wx(t) wy(u), with local t = X - a, u = Y - b and
/// w(t) = 1 - t for index 0, t for index 1.
using CellMoments = std::array<std::array<double, 2>, 2>;

/// A_0 = int_0^1 (1 + v^2)^{-s} dv by composite Gauss with panel doubling.
inline double angular_moment(double s, const QuadratureConfig& quad) {
    const GaussRule rule = gauss_legendre(quad.gauss_order);
    auto f = [s](double v) { return std::pow(1.0 + v * v, -s); };
    double previous = integrate_gauss(rule, f, 0.0, 1.0);
    for (int level = 1; level <= quad.grading_depth; ++level) {
        const int panels = 1 << level;
        double current = 0.0;
        for (int k = 0; k < panels; ++k) {
            current += integrate_gauss(rule, f, static_cast<double>(k) / panels, static_cast<double>(k + 1) / panels);
        }
        if (std::abs(current - previous) <= quad.tol * std::abs(current)) return current;
        previous = current;
    }
    throw ToleranceNotReached("omega_bar_2d: singular-corner moment did not reach tol");
}

/// Moments of the cell touching the singularity at its corner. The Duffy map
/// (x, y) = (u, u v) makes the radial integral exact: int_0^1 u^{1-2s+m+n} du.
inline CellMoments corner_cell_moments(double s, const QuadratureConfig& quad) {
    const double a0 = angular_moment(s, quad);
    const double a1 = (std::pow(2.0, 1.0 - s) - 1.0) / (2.0 * (1.0 - s));
    // M_{mn} = int r^{-2s} x^m y^n = (A_n + A_m) / (2 - 2s + m + n)
    const double m00 = 2.0 * a0 / (2.0 - 2.0 * s);
    const double m10 = (a0 + a1) / (3.0 - 2.0 * s);
    const double m11 = 2.0 * a1 / (4.0 - 2.0 * s);
    CellMoments m{};
    m[1][1] = m11;
    m[1][0] = m10 - m11;
    m[0][1] = m10 - m11;
    m[0][0] = m00 - 2.0 * m10 + m11;
    return m;
}

/// Tensor Gauss moments for a cell (a, b) >= 0 not touching the origin.
inline CellMoments regular_cell_moments(long a, long b, double s, const GaussRule& rule) {
    CellMoments m{};
    const std::size_t n = rule.nodes.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double t = 0.5 * (1.0 + rule.nodes[i]);
        const double x = static_cast<double>(a) + t;
        const double wi = 0.5 * rule.weights[i];
        double row0 = 0.0, row1 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double u = 0.5 * (1.0 + rule.nodes[j]);
            const double y = static_cast<double>(b) + u;
            const double k = 0.5 * rule.weights[j] * std::pow(x * x + y * y, -s);
            row0 += k * (1.0 - u);
            row1 += k * u;
        }
        m[0][0] += wi * (1.0 - t) * row0;
        m[0][1] += wi * (1.0 - t) * row1;
        m[1][0] += wi * t * row0;
        m[1][1] += wi * t * row1;
    }
    return m;
}

/// Table of cell moments for cells (a, b), 0 <= a, b <= extent.
class CellMomentTable {
public:
    CellMomentTable(long extent, double s, const QuadratureConfig& quad)
        : extent_(extent), cells_(static_cast<std::size_t>((extent + 1) * (extent + 1))) {
        const GaussRule rule = gauss_legendre(quad.gauss_order);
        const CellMoments corner = corner_cell_moments(s, quad);
        parallel_for(0, extent + 1, [&](std::ptrdiff_t a) {
            for (long b = 0; b <= extent; ++b) {
                cells_[index(a, b)] = (a == 0 && b == 0) ? corner : regular_cell_moments(a, b, s, rule);
            }
        });
    }

    /// Integral of r^{-2s} times wx * wy over cell (a, b); cells with negative
    /// corners are mapped by reflection, which swaps rising and falling weights.
    [[nodiscard]] double integral(long a, long b, int wx, int wy) const {
        if (a < 0) a = -a - 1, wx = 1 - wx;
        if (b < 0) b = -b - 1, wy = 1 - wy;
        if (a > extent_ || b > extent_) throw std::out_of_range("cell moment table too small");
        return cells_[index(a, b)][wx][wy];
    }

    /// Dimensionless hat moment: int over [p-1, p+1] x [q-1, q+1] of r^{-2s} (1-|X-p|)(1-|Y-q|).
    [[nodiscard]] double hat_moment(long p, long q) const {
        return integral(p - 1, q - 1, 1, 1) + integral(p - 1, q, 1, 0) + integral(p, q - 1, 0, 1) +
               integral(p, q, 0, 0);
    }

    [[nodiscard]] long extent() const noexcept { return extent_; }

private:
    [[nodiscard]] std::size_t index(long a, long b) const noexcept {
        return static_cast<std::size_t>(a * (extent_ + 1) + b);
    }

    long extent_;
    std::vector<CellMoments> cells_;
};

}  // namespace detail

/// omega_bar_{p,q} = c_{2,s-1} int int_{[-h,h]^2} |(p h, q h) + (xi, eta)|^{-2s} phi_2(xi, eta).
[[nodiscard]] inline double omega_bar_2d(long p, long q, double h, FracOrder s, const QuadratureConfig& quad = {}) {
    if (!(h > 0.0)) throw std::domain_error("omega_bar_2d: h must be positive");
    p = std::abs(p);
    q = std::abs(q);
    const double sv = s.value();
    const detail::CellMomentTable table(std::max(p, q), sv, quad);
    return splitting_constant(2, sv - 1.0) * std::pow(h, 2.0 - 2.0 * sv) * table.hat_moment(p, q);
}

/// omega_bar_{p,q} for 0 <= p, q <= N, computed from shared cell moments.
struct OmegaTable2D {
    FracOrder s;
    Grid2D grid;
    double scale;                ///< c_{2,s-1} h^{2-2s}
    std::vector<double> values;  ///< (N+1)^2, row-major in p

    [[nodiscard]] double operator()(long p, long q) const {
        p = std::abs(p);
        q = std::abs(q);
        return values[static_cast<std::size_t>(p * (grid.N + 1) + q)];
    }
};

[[nodiscard]] inline OmegaTable2D omega_table_2d(const Grid2D& grid, FracOrder s, const QuadratureConfig& quad = {}) {
    const int N = grid.N;
    const double sv = s.value();
    const detail::CellMomentTable cells(N, sv, quad);
    OmegaTable2D table{s, grid, splitting_constant(2, sv - 1.0) * std::pow(grid.h(), 2.0 - 2.0 * sv),
                       std::vector<double>(static_cast<std::size_t>((N + 1) * (N + 1)))};
    for (long p = 0; p <= N; ++p) {
        for (long q = 0; q <= N; ++q) {
            table.values[static_cast<std::size_t>(p * (N + 1) + q)] = table.scale * cells.hat_moment(p, q);
        }
    }
    return table;
}

/// 2D stencil in quadrant storage, w(p, q) for 0 <= p, q <= N-2.
/// c00 is measured in units of c_{2,s-1} h^{2-2s}, the natural size of omega_bar.
struct WeightKernel2D {
    FracOrder s;
    Grid2D grid;
    double theta;
    double c00;
    std::vector<double> omega_bar;  ///< uncorrected, (N+1)^2 quadrant, row-major in p
    std::vector<double> w;          ///< corrected, (N-1)^2 quadrant, row-major in p

    [[nodiscard]] double h() const noexcept { return grid.h(); }
    [[nodiscard]] int N() const noexcept { return grid.N; }
    [[nodiscard]] std::size_t side() const noexcept { return static_cast<std::size_t>(grid.N - 1); }
    [[nodiscard]] double operator()(long p, long q) const {
        p = std::abs(p);
        q = std::abs(q);
        return w[static_cast<std::size_t>(p) * side() + static_cast<std::size_t>(q)];
    }
    [[nodiscard]] double omega(long p, long q) const {
        p = std::abs(p);
        q = std::abs(q);
        return omega_bar[static_cast<std::size_t>(p * (grid.N + 1) + q)];
    }
};

/// Composes w^M = (theta (-Delta)_{h,1} + (1 - theta) (-Delta)_{h,2}) omega_bar^M
/// from a precomputed omega table; omega_bar^M_{0,0} = omega_bar_{0,0} + c00 * scale.
[[nodiscard]] inline WeightKernel2D weights_2d(const OmegaTable2D& table, double theta, double c00) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw std::domain_error("weights_2d: theta must lie in [0, 1]");
    if (!(c00 >= 0.0) || !std::isfinite(c00)) throw std::domain_error("weights_2d: c00 must be nonnegative");
    const Grid2D& grid = table.grid;
    const int N = grid.N;
    const double h2 = grid.h() * grid.h();
    const double shift = c00 * table.scale;
    auto om = [&](long p, long q) { return table(p, q) + ((p == 0 && q == 0) ? shift : 0.0); };

    WeightKernel2D kernel{table.s, grid, theta, c00, table.values,
                          std::vector<double>(static_cast<std::size_t>((N - 1) * (N - 1)))};
    for (long p = 0; p <= N - 2; ++p) {
        for (long q = 0; q <= N - 2; ++q) {
            const double centre = om(p, q);
            const double five_point = -(om(p - 1, q) + om(p + 1, q) + om(p, q - 1) + om(p, q + 1) - 4.0 * centre) / h2;
            const double diagonal =
                -(om(p - 1, q - 1) + om(p + 1, q - 1) + om(p - 1, q + 1) + om(p + 1, q + 1) - 4.0 * centre) /
                (2.0 * h2);
            kernel.w[static_cast<std::size_t>(p * (N - 1) + q)] = theta * five_point + (1.0 - theta) * diagonal;
        }
    }
    return kernel;
}

[[nodiscard]] inline WeightKernel2D weights_2d(const Grid2D& grid, FracOrder s, double theta, double c00,
                                               const QuadratureConfig& quad = {}) {
    return weights_2d(omega_table_2d(grid, s, quad), theta, c00);
}

// ---------------------------------------------------------------------------
// Solvability conditions
// ---------------------------------------------------------------------------

/// Sign pattern and row sums of the stencil matrix.
/// 1D offending indices are reported as {k, 0}.
struct ConditionReport {
    bool sign_ok = false;
    double row_sum_min = 0.0;
    bool row_sum_positive = false;
    std::vector<std::array<int, 2>> offending_indices;

    [[nodiscard]] bool feasible() const noexcept { return sign_ok && row_sum_positive; }
};

/// Positive diagonal, strictly negative off-diagonals and the minimum row sum
/// of the (N-1) x (N-1) symmetric Toeplitz matrix, in O(N).
[[nodiscard]] inline ConditionReport verify_conditions_1d(const WeightKernel1D& kernel) {
    const auto& w = kernel.w;
    const int m = static_cast<int>(w.size());  // N - 1 unknowns use offsets 0..N-2
    ConditionReport report;
    if (!(w[0] > 0.0)) report.offending_indices.push_back({0, 0});
    for (int k = 1; k < m; ++k) {
        if (!(w[k] < 0.0)) report.offending_indices.push_back({k, 0});
    }
    report.sign_ok = report.offending_indices.empty();

    std::vector<double> prefix(static_cast<std::size_t>(m));
    double running = 0.0;
    for (int k = 0; k < m; ++k) prefix[k] = (running += w[k]);
    // row i (1-based) covers offsets -(i-1) .. (N-1-i) = -(i-1) .. (m-i)
    double best = INFINITY;
    for (int i = 1; i <= m; ++i) {
        const double row = prefix[i - 1] + prefix[m - i] - w[0];
        best = std::min(best, row);
    }
    report.row_sum_min = best;
    report.row_sum_positive = best > 0.0;
    return report;
}

/// Solvability conditions for the BTTB matrix: w(0,0) > 0, every other
/// entry with |p|, |q| <= N-2 strictly negative, and the minimum row sum.
[[nodiscard]] inline ConditionReport verify_conditions_2d(const WeightKernel2D& kernel) {
    const long m = static_cast<long>(kernel.side());
    ConditionReport report;
    for (long p = 0; p < m; ++p) {
        for (long q = 0; q < m; ++q) {
            const double v = kernel(p, q);
            const bool ok = (p == 0 && q == 0) ? v > 0.0 : v < 0.0;
            if (!ok) report.offending_indices.push_back({static_cast<int>(p), static_cast<int>(q)});
        }
    }
    report.sign_ok = report.offending_indices.empty();

    // quadrant prefix sums Q(x, y) = sum_{i<=x, j<=y} w(i, j)
    std::vector<double> Q(static_cast<std::size_t>(m * m));
    auto at = [m](long x, long y) { return static_cast<std::size_t>(x * m + y); };
    for (long x = 0; x < m; ++x) {
        double row = 0.0;
        for (long y = 0; y < m; ++y) {
            row += kernel(x, y);
            Q[at(x, y)] = row + (x > 0 ? Q[at(x - 1, y)] : 0.0);
        }
    }
    // row (p, q) sums offsets di in [-(p-1), m-p], dj in [-(q-1), m-q]
    double best = INFINITY;
    for (long p = 1; p <= m; ++p) {
        const long A = p - 1, B = m - p;
        for (long q = 1; q <= m; ++q) {
            const long C = q - 1, D = m - q;
            const double row = Q[at(A, C)] + Q[at(A, D)] + Q[at(B, C)] + Q[at(B, D)] - Q[at(A, 0)] - Q[at(B, 0)] -
                               Q[at(0, C)] - Q[at(0, D)] + Q[at(0, 0)];
            best = std::min(best, row);
        }
    }
    report.row_sum_min = best;
    report.row_sum_positive = best > 0.0;
    return report;
}

}  // namespace fraclap
