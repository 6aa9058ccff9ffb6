#pragma once

// Refinement studies: truncation and solve errors with observed rates, the
// theta-feasibility scan and the mean exit-time study.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraclap/analytic.hpp"
#include "fraclap/boundary.hpp"
#include "fraclap/grid.hpp"
#include "fraclap/kernel_weights.hpp"
#include "fraclap/operator.hpp"
#include "fraclap/parallel.hpp"
#include "fraclap/solver.hpp"

namespace fraclap {

/// One configuration of a refinement study.
/// 1D: u = (1 - (x/radius)^2)_+^{P+s} on (-L, L), exterior data u restricted to the complement.
/// 2D: u = ((1 - x^2)(1 - y^2))^2 on (-1, 1)^2 with zero exterior data.
struct StudyCase {
    int dim = 1;
    double s = 0.5;
    double P = 1.0;
    double theta = 1.0;
    double c00 = 0.0;
    double L = 1.0;
    double radius = 1.0;
};

struct StudyOptions {
    Norm norm = Norm::inf;
    SolverOptions solver{1e-12, 0, {}};
    QuadratureConfig quad{};
    int reference_N = 0;  ///< 2D solve studies: reference resolution, 0 means 4x the finest
};

struct RateRow {
    int N = 0;
    double h = 0.0;
    double error = 0.0;
    std::optional<double> rate;  ///< log2(e(2h) / e(h)), stored on the finer row
    int iterations = 0;
};

struct RateTable {
    std::string experiment;
    StudyCase params;
    Norm norm = Norm::inf;
    int reference_N = 0;
    std::vector<RateRow> rows;
};

namespace detail {

inline void check_refinement_list(std::span<const int> N_list) {
    if (N_list.empty()) throw std::invalid_argument("N list must not be empty");
    for (std::size_t k = 1; k < N_list.size(); ++k) {
        if (N_list[k] != 2 * N_list[k - 1]) {
            throw std::invalid_argument("N list must double at every step");
        }
    }
}

inline void fill_rates(RateTable& table) {
    for (std::size_t k = 1; k < table.rows.size(); ++k) {
        table.rows[k].rate = std::log2(table.rows[k - 1].error / table.rows[k].error);
    }
}

inline std::vector<double> sample_interior(const Grid1D& grid, const auto& fn) {
    std::vector<double> v(grid.interior_size());
    for (int i = 1; i < grid.N; ++i) v[static_cast<std::size_t>(i - 1)] = fn(grid.node(i));
    return v;
}

inline std::vector<double> sample_interior(const Grid2D& grid, const auto& fn) {
    std::vector<double> v(grid.interior_size());
    for (int i = 1; i < grid.N; ++i) {
        for (int j = 1; j < grid.N; ++j) v[grid.interior_index(i, j)] = fn(grid.node(i), grid.node(j));
    }
    return v;
}

/// Values at the coarse interior nodes of a field on a grid refined by `ratio`.
inline std::vector<double> restrict_to(const Grid2D& coarse, const Grid2D& fine, std::span<const double> field) {
    const int ratio = fine.N / coarse.N;
    std::vector<double> v(coarse.interior_size());
    for (int i = 1; i < coarse.N; ++i) {
        for (int j = 1; j < coarse.N; ++j) {
            v[coarse.interior_index(i, j)] = field[fine.interior_index(ratio * i, ratio * j)];
        }
    }
    return v;
}

inline ExteriorData1D exterior_for(const StudyCase& c) {
    return c.L < c.radius ? dyda_exterior_1d(c.P, FracOrder(c.s), c.radius, c.L) : ExteriorData1D::zero();
}

/// Discrete operator applied to the 2D benchmark at all interior nodes of an N grid.
inline std::vector<double> apply_benchmark_2d(double s, double theta, double c00, int N, const QuadratureConfig& quad) {
    const Grid2D grid(1.0, N);
    const BTTBOperator2D op(weights_2d(grid, FracOrder(s), theta, c00, quad));
    return op.apply(sample_interior(grid, analytic::benchmark_2d));
}

}  // namespace detail

/// 1D: || B u + G - f || against the closed form f. 2D: e_h = || (B_h u)(x) - (B_{h/2} u)(x) ||
/// over the coarse interior nodes.
[[nodiscard]] inline RateTable run_truncation_study(const StudyCase& c, std::span<const int> N_list,
                                                    const StudyOptions& options = {}) {
    detail::check_refinement_list(N_list);
    RateTable table{c.dim == 1 ? "truncation-1d" : "truncation-2d", c, options.norm, 0, {}};
    const FracOrder s(c.s);
    if (c.dim == 1) {
        const analytic::DydaSolution exact{c.P, s, c.radius};
        const ExteriorData1D ext = detail::exterior_for(c);
        for (int N : N_list) {
            const Grid1D grid(c.L, N);
            const WeightKernel1D kernel = weights_1d(grid, s);
            const ToeplitzOperator1D op(kernel);
            const BoundaryVector bv = boundary_vector_1d(kernel, ext, options.quad);
            const auto u = detail::sample_interior(grid, [&](double x) { return exact.u(x); });
            const auto f = detail::sample_interior(grid, [&](double x) { return exact.f(x); });
            const double e = truncation_error(op, bv.G, u, f, options.norm, grid.h(), 1);
            table.rows.push_back({N, grid.h(), e, std::nullopt, 0});
        }
    } else if (c.dim == 2) {
        std::vector<double> coarse = detail::apply_benchmark_2d(c.s, c.theta, c.c00, N_list[0], options.quad);
        for (int N : N_list) {
            const Grid2D grid(1.0, N), fine(1.0, 2 * N);
            const std::vector<double> next = detail::apply_benchmark_2d(c.s, c.theta, c.c00, 2 * N, options.quad);
            const double e = error_norm(coarse, detail::restrict_to(grid, fine, next), options.norm, grid.h(), 2);
            table.rows.push_back({N, grid.h(), e, std::nullopt, 0});
            coarse = next;
        }
    } else {
        throw std::invalid_argument("study dimension must be 1 or 2");
    }
    detail::fill_rates(table);
    return table;
}

/// Solves the Dirichlet problem per resolution. 1D errors are against the
/// closed-form u; in 2D the unknown f is represented by the theta = 1, c00 = 0
/// operator applied to u on the reference grid, restricted to each study grid.
[[nodiscard]] inline RateTable run_convergence_study(const StudyCase& c, std::span<const int> N_list,
                                                     const StudyOptions& options = {}) {
    detail::check_refinement_list(N_list);
    RateTable table{c.dim == 1 ? "convergence-1d" : "convergence-2d", c, options.norm, 0, {}};
    const FracOrder s(c.s);
    auto solve = [&](const auto& system) {
        const SolveReport report = solve_dirichlet(system, options.solver);
        if (!report.converged) {
            throw NotConverged("CG did not reach the residual tolerance (residual " +
                               std::to_string(report.residual) + ")");
        }
        return report;
    };
    if (c.dim == 1) {
        const analytic::DydaSolution exact{c.P, s, c.radius};
        const ExteriorData1D ext = detail::exterior_for(c);
        for (int N : N_list) {
            const Grid1D grid(c.L, N);
            const System1D system =
                make_system_1d(weights_1d(grid, s), ext, [&](double x) { return exact.f(x); }, options.quad);
            const SolveReport report = solve(system);
            const auto u = detail::sample_interior(grid, [&](double x) { return exact.u(x); });
            table.rows.push_back(
                {N, grid.h(), error_norm(report.U, u, options.norm, grid.h(), 1), std::nullopt, report.iterations});
        }
    } else if (c.dim == 2) {
        const int N_ref = options.reference_N > 0 ? options.reference_N : 4 * N_list.back();
        if (N_ref % N_list.back() != 0) throw std::invalid_argument("reference N must be a multiple of every study N");
        table.reference_N = N_ref;
        const Grid2D ref_grid(1.0, N_ref);
        const std::vector<double> F_ref = detail::apply_benchmark_2d(c.s, 1.0, 0.0, N_ref, options.quad);
        for (int N : N_list) {
            const Grid2D grid(1.0, N);
            const WeightKernel2D kernel = weights_2d(grid, s, c.theta, c.c00, options.quad);
            System2D system{BTTBOperator2D(kernel), std::vector<double>(grid.interior_size(), 0.0),
                            detail::restrict_to(grid, ref_grid, F_ref), verify_conditions_2d(kernel).feasible()};
            const SolveReport report = solve(system);
            const auto u = detail::sample_interior(grid, analytic::benchmark_2d);
            table.rows.push_back(
                {N, grid.h(), error_norm(report.U, u, options.norm, grid.h(), 2), std::nullopt, report.iterations});
        }
    } else {
        throw std::invalid_argument("study dimension must be 1 or 2");
    }
    detail::fill_rates(table);
    return table;
}

// ---------------------------------------------------------------------------
// Feasibility scan
// ---------------------------------------------------------------------------

struct FeasibilityMap {
    std::vector<double> s_grid;
    std::vector<double> theta_grid;
    double c00 = 0.0;
    int N_probe = 16;
    std::vector<char> feasible;  ///< s-major: feasible[is * theta_grid.size() + it]

    [[nodiscard]] bool at(std::size_t is, std::size_t it) const { return feasible.at(is * theta_grid.size() + it) != 0; }
    /// Feasible theta values for s_grid[is].
    [[nodiscard]] std::vector<double> feasible_thetas(std::size_t is) const {
        std::vector<double> out;
        for (std::size_t it = 0; it < theta_grid.size(); ++it) {
            if (at(is, it)) out.push_back(theta_grid[it]);
        }
        return out;
    }
};

/// Points lo, lo + step, ... up to hi (inclusive within step/1000), skipping s = 1/2.
[[nodiscard]] inline std::vector<double> uniform_grid(double lo, double hi, double step, bool skip_half = false) {
    if (!(step > 0.0) || hi < lo) throw std::invalid_argument("grid needs step > 0 and hi >= lo");
    std::vector<double> out;
    const long count = static_cast<long>(std::floor((hi - lo) / step + 1e-3));
    for (long k = 0; k <= count; ++k) {
        const double v = lo + static_cast<double>(k) * step;
        if (skip_half && std::abs(v - 0.5) < 1e-9) continue;
        out.push_back(v);
    }
    return out;
}

/// For each s the omega table is built once and reused for every theta.
[[nodiscard]] inline FeasibilityMap theta_feasibility_scan(std::vector<double> s_grid, std::vector<double> theta_grid,
                                                           double c00, int N_probe = 16,
                                                           const QuadratureConfig& quad = {}) {
    if (N_probe < 16) throw std::invalid_argument("feasibility probe needs N >= 16");
    FeasibilityMap map{std::move(s_grid), std::move(theta_grid), c00, N_probe, {}};
    map.feasible.assign(map.s_grid.size() * map.theta_grid.size(), 0);
    const Grid2D grid(1.0, N_probe);
    parallel_for(0, static_cast<std::ptrdiff_t>(map.s_grid.size()), [&](std::ptrdiff_t is) {
        const OmegaTable2D table = omega_table_2d(grid, FracOrder(map.s_grid[static_cast<std::size_t>(is)]), quad);
        for (std::size_t it = 0; it < map.theta_grid.size(); ++it) {
            const bool ok = verify_conditions_2d(weights_2d(table, map.theta_grid[it], c00)).feasible();
            map.feasible[static_cast<std::size_t>(is) * map.theta_grid.size() + it] = ok ? 1 : 0;
        }
    });
    return map;
}

// ---------------------------------------------------------------------------
// Mean exit time
// ---------------------------------------------------------------------------

struct ExitTimeResult {
    double s = 0.0;
    double kappa = 0.0;
    int N = 0;
    std::vector<double> U;  ///< interior values, Grid2D::interior_index order
    double max_value = 0.0;
    double center_value = 0.0;
    /// Distance from the left edge at which u reaches half its centre value along y = 0.
    double boundary_layer = 0.0;
    double dominance_margin = 0.0;
    bool conditions_hold = false;
    int iterations = 0;
    double residual = 0.0;
    SolveMethod method = SolveMethod::bicgstab;
};

/// Solves (grad P . grad + (-Delta)^s) u = 1 on (-1, 1)^2 with P = kappa |x|^2 and
/// u = 0 outside, for every (s, kappa) pair. Results are ordered s-major.
[[nodiscard]] inline std::vector<ExitTimeResult> run_exit_time_study(std::vector<double> s_list,
                                                                     std::vector<double> kappa_list, int N, double c00,
                                                                     double theta, const StudyOptions& options = {}) {
    if (N % 2 != 0) throw std::invalid_argument("exit-time study needs even N so the centre is a node");
    std::sort(s_list.begin(), s_list.end());
    std::sort(kappa_list.begin(), kappa_list.end());
    std::vector<ExitTimeResult> results(s_list.size() * kappa_list.size());
    const Grid2D grid(1.0, N);
    parallel_for(0, static_cast<std::ptrdiff_t>(s_list.size()), [&](std::ptrdiff_t is) {
        const double s = s_list[static_cast<std::size_t>(is)];
        const WeightKernel2D kernel = weights_2d(grid, FracOrder(s), theta, c00, options.quad);
        const bool conditions = verify_conditions_2d(kernel).feasible();
        for (std::size_t ik = 0; ik < kappa_list.size(); ++ik) {
            const double kappa = kappa_list[ik];
            const DriftSystem drift = assemble_drift(kernel, Potential::harmonic(kappa));
            const SolveReport report = solve_exit_time(drift, options.solver);
            if (!report.converged) throw NotConverged("exit-time solve did not converge");
            ExitTimeResult r;
            r.s = s;
            r.kappa = kappa;
            r.N = N;
            r.U = report.U;
            r.max_value = *std::max_element(r.U.begin(), r.U.end());
            r.center_value = r.U[grid.interior_index(N / 2, N / 2)];
            // midline walk from the boundary node (value 0) towards the centre
            const double half = 0.5 * r.center_value;
            double previous = 0.0;
            for (int i = 1; i <= N / 2; ++i) {
                const double v = r.U[grid.interior_index(i, N / 2)];
                if (v >= half) {
                    const double t = (half - previous) / (v - previous);
                    r.boundary_layer = (i - 1 + t) * grid.h();
                    break;
                }
                previous = v;
            }
            r.dominance_margin = drift.margin();
            r.conditions_hold = conditions;
            r.iterations = report.iterations;
            r.residual = report.residual;
            r.method = report.method;
            results[static_cast<std::size_t>(is) * kappa_list.size() + ik] = std::move(r);
        }
    });
    return results;
}

}  // namespace fraclap
