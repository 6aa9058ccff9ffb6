#pragma once

// Text outputs: CSV tables, JSON summaries and gnuplot column files.

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <span>
#include <string>
#include <vector>

#include "fraclap/harness.hpp"
#include "fraclap/kernel_weights.hpp"
#include "fraclap/solver.hpp"

namespace fraclap::io {

/// Scientific notation with 6 significant digits, e.g. 2.66200e-02.
[[nodiscard]] inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5e", v);
    return buf;
}

/// Plain value for parameters (s, theta, coordinates): shortest round-trip form.
[[nodiscard]] inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // trim to the shortest representation that reads back identically
    for (int digits = 1; digits <= 17; ++digits) {
        char probe[32];
        std::snprintf(probe, sizeof probe, "%.*g", digits, v);
        if (std::stod(probe) == v) return probe;
    }
    return buf;
}

[[nodiscard]] inline const char* to_string(Norm n) { return n == Norm::inf ? "inf" : "l2"; }

// ---------------------------------------------------------------------------
// Rate tables
// ---------------------------------------------------------------------------

inline void write_rate_tables_csv(std::ostream& out, std::span<const RateTable> tables) {
    out << "case,dim,s,P,theta,c00,L,N,h,error,rate\n";
    for (std::size_t c = 0; c < tables.size(); ++c) {
        const RateTable& t = tables[c];
        for (const RateRow& row : t.rows) {
            out << c << ',' << t.params.dim << ',' << num(t.params.s) << ',' << num(t.params.P) << ','
                << num(t.params.theta) << ',' << num(t.params.c00) << ',' << num(t.params.L) << ',' << row.N << ','
                << sci(row.h) << ',' << sci(row.error) << ',' << (row.rate ? num(std::round(*row.rate * 1e4) / 1e4) : "")
                << '\n';
        }
    }
}

[[nodiscard]] inline nlohmann::json to_json(const RateTable& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (const RateRow& r : t.rows) {
        nlohmann::json row{{"N", r.N}, {"h", r.h}, {"error", r.error}};
        row["rate"] = r.rate ? nlohmann::json(*r.rate) : nlohmann::json(nullptr);
        if (r.iterations > 0) row["iterations"] = r.iterations;
        rows.push_back(std::move(row));
    }
    nlohmann::json j{{"experiment", t.experiment},
                     {"dim", t.params.dim},
                     {"s", t.params.s},
                     {"P", t.params.P},
                     {"theta", t.params.theta},
                     {"c00", t.params.c00},
                     {"L", t.params.L},
                     {"norm", to_string(t.norm)},
                     {"rows", std::move(rows)}};
    if (t.reference_N > 0) j["reference_N"] = t.reference_N;
    return j;
}

// ---------------------------------------------------------------------------
// Kernels and condition reports
// ---------------------------------------------------------------------------

/// Columns k, omega_bar, w; w is blank for k > N - 2.
inline void write_kernel_csv(std::ostream& out, const WeightKernel1D& kernel) {
    out << "k,omega_bar,w\n";
    for (std::size_t k = 0; k < kernel.omega_bar.size(); ++k) {
        out << k << ',' << sci(kernel.omega_bar[k]) << ',' << (k < kernel.w.size() ? sci(kernel.w[k]) : "") << '\n';
    }
}

/// Columns p, q, omega_bar, w over the stencil quadrant 0 <= p, q <= N - 2.
inline void write_kernel_csv(std::ostream& out, const WeightKernel2D& kernel) {
    out << "p,q,omega_bar,w\n";
    const long m = static_cast<long>(kernel.side());
    for (long p = 0; p < m; ++p) {
        for (long q = 0; q < m; ++q) {
            out << p << ',' << q << ',' << sci(kernel.omega(p, q)) << ',' << sci(kernel(p, q)) << '\n';
        }
    }
}

[[nodiscard]] inline nlohmann::json to_json(const ConditionReport& r) {
    nlohmann::json offending = nlohmann::json::array();
    for (const auto& idx : r.offending_indices) offending.push_back({idx[0], idx[1]});
    return {{"sign_ok", r.sign_ok},
            {"row_sum_min", r.row_sum_min},
            {"row_sum_positive", r.row_sum_positive},
            {"feasible", r.feasible()},
            {"offending_indices", std::move(offending)}};
}

[[nodiscard]] inline nlohmann::json to_json(const SolveReport& r) {
    return {{"iterations", r.iterations},
            {"residual", r.residual},
            {"method", to_string(r.method)},
            {"converged", r.converged},
            {"conditions_hold", r.conditions_hold}};
}

// ---------------------------------------------------------------------------
// Fields
// ---------------------------------------------------------------------------

inline void write_solution_csv(std::ostream& out, const Grid1D& grid, std::span<const double> U) {
    out << "x,u\n";
    for (int i = 1; i < grid.N; ++i) out << sci(grid.node(i)) << ',' << sci(U[static_cast<std::size_t>(i - 1)]) << '\n';
}

inline void write_solution_csv(std::ostream& out, const Grid2D& grid, std::span<const double> U) {
    out << "x,y,u\n";
    for (int i = 1; i < grid.N; ++i) {
        for (int j = 1; j < grid.N; ++j) {
            out << sci(grid.node(i)) << ',' << sci(grid.node(j)) << ',' << sci(U[grid.interior_index(i, j)]) << '\n';
        }
    }
}

/// gnuplot "splot ... with pm3d" layout over all nodes (frame values 0), one x per block.
inline void write_field_gnuplot(std::ostream& out, const Grid2D& grid, std::span<const double> U) {
    out << "# x y u\n";
    for (int i = 0; i <= grid.N; ++i) {
        for (int j = 0; j <= grid.N; ++j) {
            const bool interior = i > 0 && j > 0 && i < grid.N && j < grid.N;
            out << sci(grid.node(i)) << ' ' << sci(grid.node(j)) << ' '
                << sci(interior ? U[grid.interior_index(i, j)] : 0.0) << '\n';
        }
        out << '\n';
    }
}

/// One block per s: columns s, theta, feasible (0/1).
inline void write_feasibility_gnuplot(std::ostream& out, const FeasibilityMap& map) {
    out << "# c00 = " << num(map.c00) << ", N_probe = " << map.N_probe << "\n# s theta feasible\n";
    for (std::size_t is = 0; is < map.s_grid.size(); ++is) {
        for (std::size_t it = 0; it < map.theta_grid.size(); ++it) {
            out << num(map.s_grid[is]) << ' ' << num(map.theta_grid[it]) << ' ' << (map.at(is, it) ? 1 : 0) << '\n';
        }
        out << '\n';
    }
}

[[nodiscard]] inline nlohmann::json to_json(const FeasibilityMap& map) {
    nlohmann::json per_s = nlohmann::json::array();
    for (std::size_t is = 0; is < map.s_grid.size(); ++is) {
        const auto thetas = map.feasible_thetas(is);
        nlohmann::json entry{{"s", map.s_grid[is]}, {"feasible_count", thetas.size()}};
        entry["theta_min"] = thetas.empty() ? nlohmann::json(nullptr) : nlohmann::json(thetas.front());
        entry["theta_max"] = thetas.empty() ? nlohmann::json(nullptr) : nlohmann::json(thetas.back());
        per_s.push_back(std::move(entry));
    }
    return {{"c00", map.c00}, {"N_probe", map.N_probe}, {"theta_points", map.theta_grid.size()}, {"per_s", per_s}};
}

inline void write_exit_time_summary_csv(std::ostream& out, std::span<const ExitTimeResult> results) {
    out << "s,kappa,N,max,center,boundary_layer,dominance_margin,conditions_hold,iterations,method\n";
    for (const auto& r : results) {
        out << num(r.s) << ',' << num(r.kappa) << ',' << r.N << ',' << sci(r.max_value) << ',' << sci(r.center_value)
            << ',' << sci(r.boundary_layer) << ',' << sci(r.dominance_margin) << ',' << (r.conditions_hold ? 1 : 0)
            << ',' << r.iterations << ',' << to_string(r.method) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Input
// ---------------------------------------------------------------------------

/// Reads a numeric CSV with one header row into `columns` column vectors.
[[nodiscard]] inline std::vector<std::vector<double>> read_numeric_csv(const std::string& path, std::size_t columns) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    std::vector<std::vector<double>> out(columns);
    std::string line;
    std::getline(in, line);  // header
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::stringstream row(line);
        std::string cell;
        std::size_t k = 0;
        while (std::getline(row, cell, ',')) {
            if (k >= columns) break;
            try {
                out[k++].push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": not a number: '" + cell + "'");
            }
        }
        if (k != columns) {
            throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": expected " +
                                        std::to_string(columns) + " columns");
        }
    }
    return out;
}

}  // namespace fraclap::io
