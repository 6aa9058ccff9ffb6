#pragma once

// Krylov and dense solvers for B U + G = F and for the drift-diffusion
// exit-time system.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fraclap/boundary.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/grid.hpp"
#include "fraclap/kernel_weights.hpp"
#include "fraclap/operator.hpp"

namespace fraclap {

enum class SolveMethod { cg, bicgstab, dense };

[[nodiscard]] inline const char* to_string(SolveMethod m) {
    switch (m) {
        case SolveMethod::cg: return "cg";
        case SolveMethod::bicgstab: return "bicgstab";
        case SolveMethod::dense: return "dense";
    }
    return "unknown";
}

struct SolverOptions {
    double tol = 1e-10;  ///< relative residual ||b - A x|| / ||b||
    int max_iter = 0;    ///< 0 means 10 * size
    /// Called once per iteration with (iteration, relative residual).
    std::function<void(int, double)> journal;
};

struct SolveReport {
    std::vector<double> U;
    int iterations = 0;
    double residual = 0.0;
    SolveMethod method = SolveMethod::cg;
    bool converged = false;
    bool conditions_hold = true;  ///< solvability conditions of the stencil at solve time
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline Eigen::MatrixXd to_eigen(const std::vector<double>& row_major, std::size_t n) {
    Eigen::MatrixXd A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row_major[i * n + j];
    }
    return A;
}

}  // namespace detail

/// Conjugate gradients from x = 0; on failure returns the last iterate with converged = false.
template <class Operator>
[[nodiscard]] SolveReport conjugate_gradient(const Operator& A, std::span<const double> b,
                                             const SolverOptions& options = {}) {
    const std::size_t n = b.size();
    if (A.size() != n) throw ShapeMismatch("conjugate_gradient: right-hand side length does not match operator");
    SolveReport report{std::vector<double>(n, 0.0), 0, 0.0, SolveMethod::cg, true};
    const double bnorm = detail::norm2(b);
    if (bnorm == 0.0) return report;
    const int max_iter = options.max_iter > 0 ? options.max_iter : static_cast<int>(10 * n);

    std::vector<double> r(b.begin(), b.end());
    std::vector<double> p = r;
    double rr = detail::dot(r, r);
    report.residual = 1.0;
    report.converged = false;
    for (int it = 1; it <= max_iter; ++it) {
        const std::vector<double> Ap = A.apply(p);
        const double pAp = detail::dot(p, Ap);
        if (!(pAp > 0.0)) break;  // operator not positive definite along p
        const double alpha = rr / pAp;
        for (std::size_t i = 0; i < n; ++i) {
            report.U[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        const double rr_next = detail::dot(r, r);
        report.iterations = it;
        report.residual = std::sqrt(rr_next) / bnorm;
        if (options.journal) options.journal(it, report.residual);
        if (report.residual <= options.tol) {
            report.converged = true;
            break;
        }
        const double beta = rr_next / rr;
        rr = rr_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    if (report.converged) {
        // report the true residual rather than the recurrence
        const std::vector<double> Ax = A.apply(report.U);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += (b[i] - Ax[i]) * (b[i] - Ax[i]);
        report.residual = std::sqrt(acc) / bnorm;
    }
    return report;
}

/// BiCGStab from x = 0 for nonsymmetric operators; breakdown leaves converged = false.
template <class Operator>
[[nodiscard]] SolveReport bicgstab(const Operator& A, std::span<const double> b, const SolverOptions& options = {}) {
    const std::size_t n = b.size();
    if (A.size() != n) throw ShapeMismatch("bicgstab: right-hand side length does not match operator");
    SolveReport report{std::vector<double>(n, 0.0), 0, 0.0, SolveMethod::bicgstab, true};
    const double bnorm = detail::norm2(b);
    if (bnorm == 0.0) return report;
    const int max_iter = options.max_iter > 0 ? options.max_iter : static_cast<int>(10 * n);

    std::vector<double> r(b.begin(), b.end());
    const std::vector<double> r_hat = r;
    std::vector<double> p(n, 0.0), v(n, 0.0), s(n);
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    report.residual = 1.0;
    report.converged = false;
    for (int it = 1; it <= max_iter; ++it) {
        const double rho_next = detail::dot(r_hat, r);
        if (rho_next == 0.0 || omega == 0.0) break;
        const double beta = (rho_next / rho) * (alpha / omega);
        rho = rho_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        v = A.apply(p);
        const double rv = detail::dot(r_hat, v);
        if (rv == 0.0) break;
        alpha = rho / rv;
        for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        report.iterations = it;
        if (detail::norm2(s) / bnorm <= options.tol) {
            for (std::size_t i = 0; i < n; ++i) report.U[i] += alpha * p[i];
            report.residual = detail::norm2(s) / bnorm;
            report.converged = true;
            if (options.journal) options.journal(it, report.residual);
            break;
        }
        const std::vector<double> t = A.apply(s);
        const double tt = detail::dot(t, t);
        if (tt == 0.0) break;
        omega = detail::dot(t, s) / tt;
        for (std::size_t i = 0; i < n; ++i) {
            report.U[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        report.residual = detail::norm2(r) / bnorm;
        if (options.journal) options.journal(it, report.residual);
        if (report.residual <= options.tol) {
            report.converged = true;
            break;
        }
    }
    return report;
}

/// Dense LU solve of the operator's assembled matrix; the oracle for the Krylov paths.
template <class Operator>
[[nodiscard]] SolveReport dense_solve(const Operator& A, std::span<const double> b) {
    const std::size_t n = b.size();
    if (A.size() != n) throw ShapeMismatch("dense_solve: right-hand side length does not match operator");
    const Eigen::MatrixXd M = detail::to_eigen(A.dense_matrix(), n);
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd x = M.partialPivLu().solve(rhs);
    SolveReport report{std::vector<double>(x.data(), x.data() + n), 1, 0.0, SolveMethod::dense, true};
    const double bnorm = rhs.norm();
    report.residual = bnorm == 0.0 ? 0.0 : (rhs - M * x).norm() / bnorm;
    report.converged = std::isfinite(report.residual);
    return report;
}

/// B U + G = F on the interior nodes.
template <class Operator>
struct DiscreteSystem {
    Operator op;
    std::vector<double> G;
    std::vector<double> F;
    bool conditions_hold = true;

    [[nodiscard]] std::size_t size() const noexcept { return op.size(); }
    [[nodiscard]] std::vector<double> rhs() const {
        if (G.size() != op.size() || F.size() != op.size()) throw ShapeMismatch("system vectors must match the operator");
        std::vector<double> b(F.size());
        for (std::size_t i = 0; i < b.size(); ++i) b[i] = F[i] - G[i];
        return b;
    }
};

using System1D = DiscreteSystem<ToeplitzOperator1D>;
using System2D = DiscreteSystem<BTTBOperator2D>;

/// Assembles the 1D system with exterior data ext and source f at interior nodes.
[[nodiscard]] inline System1D make_system_1d(const WeightKernel1D& kernel, const ExteriorData1D& ext,
                                            const std::function<double(double)>& f,
                                            const QuadratureConfig& quad = {}) {
    const Grid1D& grid = kernel.grid;
    std::vector<double> F(grid.interior_size());
    for (int i = 1; i < grid.N; ++i) F[i - 1] = f(grid.node(i));
    return {ToeplitzOperator1D(kernel), boundary_vector_1d(kernel, ext, quad).G, std::move(F),
            verify_conditions_1d(kernel).feasible()};
}

[[nodiscard]] inline System2D make_system_2d(const WeightKernel2D& kernel, const ExteriorData2D& ext,
                                            const std::function<double(double, double)>& f,
                                            const QuadratureConfig& quad = {}) {
    const Grid2D& grid = kernel.grid;
    std::vector<double> F(grid.interior_size());
    for (int i = 1; i < grid.N; ++i) {
        for (int j = 1; j < grid.N; ++j) F[grid.interior_index(i, j)] = f(grid.node(i), grid.node(j));
    }
    return {BTTBOperator2D(kernel), boundary_vector_2d(kernel, ext, quad).G, std::move(F),
            verify_conditions_2d(kernel).feasible()};
}

/// CG on B U = F - G.
template <class Operator>
[[nodiscard]] SolveReport solve_dirichlet(const DiscreteSystem<Operator>& system, const SolverOptions& options = {}) {
    SolveReport report = conjugate_gradient(system.op, system.rhs(), options);
    report.conditions_hold = system.conditions_hold;
    return report;
}

// ---------------------------------------------------------------------------
// Drift-diffusion exit time
// ---------------------------------------------------------------------------

/// Potential P through its gradient.
struct Potential {
    std::function<std::array<double, 2>(double, double)> gradient;

    [[nodiscard]] static Potential constant() {
        return {[](double, double) { return std::array<double, 2>{0.0, 0.0}; }};
    }
    /// P = kappa (x^2 + y^2).
    [[nodiscard]] static Potential harmonic(double kappa) {
        return {[kappa](double x, double y) { return std::array<double, 2>{2.0 * kappa * x, 2.0 * kappa * y}; }};
    }
};

/// (grad P . grad + B_2) on the interior nodes. The drift uses central
/// differences with zero values outside the domain.
class DriftSystem {
public:
    DriftSystem(const WeightKernel2D& kernel, const Potential& potential)
        : grid_(kernel.grid), fractional_(kernel), bx_(grid_.interior_size()), by_(grid_.interior_size()) {
        for (int i = 1; i < grid_.N; ++i) {
            for (int j = 1; j < grid_.N; ++j) {
                const auto g = potential.gradient(grid_.node(i), grid_.node(j));
                bx_[grid_.interior_index(i, j)] = g[0];
                by_[grid_.interior_index(i, j)] = g[1];
            }
        }
        margin_ = dominance_margin(kernel);
    }

    [[nodiscard]] std::size_t size() const noexcept { return fractional_.size(); }
    [[nodiscard]] const Grid2D& grid() const noexcept { return grid_; }
    [[nodiscard]] const BTTBOperator2D& fractional() const noexcept { return fractional_; }
    /// min over rows of a_ii - sum_{j != i} |a_ij| for the assembled matrix.
    [[nodiscard]] double margin() const noexcept { return margin_; }

    [[nodiscard]] std::vector<double> apply_drift(std::span<const double> u) const {
        if (u.size() != size()) throw ShapeMismatch("drift apply: length mismatch");
        const int N = grid_.N;
        const double inv2h = 1.0 / (2.0 * grid_.h());
        auto at = [&](int i, int j) {
            return (i < 1 || j < 1 || i > N - 1 || j > N - 1) ? 0.0 : u[grid_.interior_index(i, j)];
        };
        std::vector<double> v(size());
        for (int i = 1; i < N; ++i) {
            for (int j = 1; j < N; ++j) {
                const std::size_t k = grid_.interior_index(i, j);
                v[k] = bx_[k] * (at(i + 1, j) - at(i - 1, j)) * inv2h + by_[k] * (at(i, j + 1) - at(i, j - 1)) * inv2h;
            }
        }
        return v;
    }

    [[nodiscard]] std::vector<double> apply(std::span<const double> u) const {
        std::vector<double> v = fractional_.apply(u);
        const std::vector<double> d = apply_drift(u);
        for (std::size_t k = 0; k < v.size(); ++k) v[k] += d[k];
        return v;
    }

    /// Row-major dense drift matrix.
    [[nodiscard]] std::vector<double> dense_drift_matrix() const {
        const std::size_t n = size();
        const int N = grid_.N;
        const double inv2h = 1.0 / (2.0 * grid_.h());
        std::vector<double> a(n * n, 0.0);
        for (int i = 1; i < N; ++i) {
            for (int j = 1; j < N; ++j) {
                const std::size_t k = grid_.interior_index(i, j);
                if (i + 1 < N) a[k * n + grid_.interior_index(i + 1, j)] += bx_[k] * inv2h;
                if (i - 1 > 0) a[k * n + grid_.interior_index(i - 1, j)] -= bx_[k] * inv2h;
                if (j + 1 < N) a[k * n + grid_.interior_index(i, j + 1)] += by_[k] * inv2h;
                if (j - 1 > 0) a[k * n + grid_.interior_index(i, j - 1)] -= by_[k] * inv2h;
            }
        }
        return a;
    }

    [[nodiscard]] std::vector<double> dense_matrix() const {
        std::vector<double> a = fractional_.dense_matrix();
        const std::vector<double> d = dense_drift_matrix();
        for (std::size_t k = 0; k < a.size(); ++k) a[k] += d[k];
        return a;
    }

private:
    double dominance_margin(const WeightKernel2D& kernel) const {
        const long m = static_cast<long>(kernel.side());
        // quadrant prefix sums of |w|
        std::vector<double> Q(static_cast<std::size_t>(m * m));
        auto at = [m](long x, long y) { return static_cast<std::size_t>(x * m + y); };
        for (long x = 0; x < m; ++x) {
            double row = 0.0;
            for (long y = 0; y < m; ++y) {
                row += std::abs(kernel(x, y));
                Q[at(x, y)] = row + (x > 0 ? Q[at(x - 1, y)] : 0.0);
            }
        }
        const double inv2h = 1.0 / (2.0 * grid_.h());
        const double w00 = kernel(0, 0), w10 = kernel(1, 0), w01 = kernel(0, 1);
        double best = INFINITY;
        for (long p = 1; p <= m; ++p) {
            const long A = p - 1, B = m - p;
            for (long q = 1; q <= m; ++q) {
                const long C = q - 1, D = m - q;
                const std::size_t k = grid_.interior_index(static_cast<int>(p), static_cast<int>(q));
                double off = Q[at(A, C)] + Q[at(A, D)] + Q[at(B, C)] + Q[at(B, D)] - Q[at(A, 0)] - Q[at(B, 0)] -
                             Q[at(0, C)] - Q[at(0, D)] + Q[at(0, 0)] - std::abs(w00);
                const double dx = bx_[k] * inv2h, dy = by_[k] * inv2h;
                if (p < m) off += std::abs(w10 + dx) - std::abs(w10);
                if (p > 1) off += std::abs(w10 - dx) - std::abs(w10);
                if (q < m) off += std::abs(w01 + dy) - std::abs(w01);
                if (q > 1) off += std::abs(w01 - dy) - std::abs(w01);
                best = std::min(best, w00 - off);
            }
        }
        return best;
    }

    Grid2D grid_;
    BTTBOperator2D fractional_;
    std::vector<double> bx_;
    std::vector<double> by_;
    double margin_ = 0.0;
};

[[nodiscard]] inline DriftSystem assemble_drift(const WeightKernel2D& kernel, const Potential& potential) {
    return DriftSystem(kernel, potential);
}

/// Solves (drift + B_2) U = 1 with zero exterior data. Falls back to a dense
/// solve for N <= 64 when BiCGStab breaks down or stalls.
[[nodiscard]] inline SolveReport solve_exit_time(const DriftSystem& drift, const SolverOptions& options = {}) {
    const std::vector<double> ones(drift.size(), 1.0);
    SolveReport report = bicgstab(drift, ones, options);
    if (!report.converged && drift.grid().N <= 64) report = dense_solve(drift, ones);
    return report;
}

}  // namespace fraclap
