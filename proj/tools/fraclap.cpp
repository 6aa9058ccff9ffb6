// fraclap command-line front end: weights, solve and study subcommands.

#include <CLI11.hpp>

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fraclap/analytic.hpp"
#include "fraclap/boundary.hpp"
#include "fraclap/config.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/harness.hpp"
#include "fraclap/io.hpp"
#include "fraclap/kernel_weights.hpp"
#include "fraclap/operator.hpp"
#include "fraclap/solver.hpp"

namespace fs = std::filesystem;
using fraclap::config::ConfigError;
using fraclap::config::RunConfig;

namespace {

enum ExitCode { ok = 0, failure = 1, usage = 2, condition_failure = 3, not_converged = 4 };

/// Flags shared by every subcommand; unset flags leave the config value alone.
struct Overrides {
    std::string config_path;
    std::string out = "fraclap-out";
    std::optional<int> dim, N, N_ref, max_iter, probe_N;
    std::optional<double> s, P, theta, c00, L, tol, rhs_value, radius, s_step, theta_step;
    std::optional<std::string> rhs, exterior, exterior_file, norm;
    std::optional<std::uint64_t> seed;
    bool no_strict = false;
    bool dump_matrix = false;
    // study only
    std::string experiment;
    std::vector<double> s_list, kappa_list;
    std::vector<int> N_list;
};

template <class T>
void set_if(const std::optional<T>& v, T& target) {
    if (v) target = *v;
}

RunConfig build_config(const Overrides& o) {
    RunConfig c = o.config_path.empty() ? RunConfig{} : fraclap::config::load(o.config_path);
    set_if(o.dim, c.dim);
    set_if(o.N, c.N);
    set_if(o.N_ref, c.N_ref);
    set_if(o.max_iter, c.max_iter);
    set_if(o.probe_N, c.scan.N_probe);
    set_if(o.s, c.s);
    set_if(o.P, c.P);
    set_if(o.theta, c.theta);
    set_if(o.c00, c.c00);
    set_if(o.L, c.L);
    set_if(o.tol, c.tol);
    set_if(o.rhs_value, c.rhs_value);
    set_if(o.radius, c.exterior.radius);
    set_if(o.s_step, c.scan.s_step);
    set_if(o.theta_step, c.scan.theta_step);
    set_if(o.rhs, c.rhs);
    set_if(o.exterior, c.exterior.kind);
    set_if(o.exterior_file, c.exterior.file);
    set_if(o.norm, c.norm);
    set_if(o.seed, c.seed);
    if (o.no_strict) c.strict = false;
    if (!o.N_list.empty()) c.N_list = o.N_list;
    return c;
}

fraclap::Norm parse_norm(const std::string& n) { return n == "l2" ? fraclap::Norm::l2 : fraclap::Norm::inf; }

fraclap::QuadratureConfig quad_of(const RunConfig& c) { return c.quadrature; }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

template <class Fn>
void write_with(const fs::path& path, Fn&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    fn(out);
}

template <class Json>
void write_json(const fs::path& path, const Json& j) {
    write_text(path, j.dump(2) + "\n");
}

fs::path prepare_output(const Overrides& o, const RunConfig& c) {
    const fs::path dir(o.out);
    fs::create_directories(dir);
    write_json(dir / "config.json", fraclap::config::to_json(c));
    return dir;
}

// ---------------------------------------------------------------------------
// weights
// ---------------------------------------------------------------------------

/// Smallest Rayleigh quotient u.Bu / u.u over a few seeded random vectors.
template <class Op>
double rayleigh_min(const Op& op, std::uint64_t seed, int samples = 10) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    double best = INFINITY;
    for (int k = 0; k < samples; ++k) {
        std::vector<double> u(op.size());
        for (double& v : u) v = dist(rng);
        const auto Bu = op.apply(u);
        best = std::min(best, fraclap::detail::dot(u, Bu) / fraclap::detail::dot(u, u));
    }
    return best;
}

template <class Op>
void dump_matrix(const fs::path& path, const Op& op) {
    const std::size_t n = op.size();
    const auto A = op.dense_matrix();
    write_with(path, [&](std::ostream& out) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) out << (j ? "," : "") << fraclap::io::sci(A[i * n + j]);
            out << '\n';
        }
    });
}

int cmd_weights(const Overrides& o) {
    RunConfig c = build_config(o);
    if (c.N == 0) c.N = 64;
    fraclap::config::validate(c);
    const fraclap::FracOrder s(c.s);
    if (o.dump_matrix && c.N > 64) throw ConfigError("--dump-matrix is limited to N <= 64");
    const fs::path dir = prepare_output(o, c);

    fraclap::ConditionReport report;
    nlohmann::json summary{{"dim", c.dim}, {"s", c.s}, {"N", c.N}, {"L", c.L}, {"seed", c.seed}};
    if (c.dim == 1) {
        const fraclap::Grid1D grid(c.L, c.N);
        const auto kernel = fraclap::weights_1d(grid, s);
        report = fraclap::verify_conditions_1d(kernel);
        write_with(dir / "weights.csv", [&](std::ostream& out) { fraclap::io::write_kernel_csv(out, kernel); });
        const fraclap::ToeplitzOperator1D op(kernel);
        summary["modified"] = kernel.modified;
        summary["rayleigh_min"] = rayleigh_min(op, c.seed);
        if (o.dump_matrix) dump_matrix(dir / "matrix.csv", op);
    } else {
        const fraclap::Grid2D grid(c.L, c.N);
        const auto kernel = fraclap::weights_2d(grid, s, c.theta, c.c00, quad_of(c));
        report = fraclap::verify_conditions_2d(kernel);
        write_with(dir / "weights.csv", [&](std::ostream& out) { fraclap::io::write_kernel_csv(out, kernel); });
        const fraclap::BTTBOperator2D op(kernel);
        summary["theta"] = c.theta;
        summary["c00"] = c.c00;
        summary["rayleigh_min"] = rayleigh_min(op, c.seed);
        if (o.dump_matrix) dump_matrix(dir / "matrix.csv", op);
    }
    summary["conditions"] = fraclap::io::to_json(report);
    write_json(dir / "conditions.json", summary);
    std::cerr << "weights: conditions " << (report.feasible() ? "hold" : "FAIL") << ", min row sum "
              << fraclap::io::sci(report.row_sum_min) << "\n";
    return (!report.feasible() && c.strict) ? condition_failure : ok;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

fraclap::ExteriorData1D exterior_1d(const RunConfig& c) {
    const auto& e = c.exterior;
    if (e.kind == "dyda") return fraclap::dyda_exterior_1d(c.P, fraclap::FracOrder(c.s), e.radius, c.L);
    if (e.kind == "table") {
        auto cols = fraclap::io::read_numeric_csv(e.file, 2);
        return fraclap::tabulated_exterior_1d(std::move(cols[0]), std::move(cols[1]), c.L);
    }
    return fraclap::ExteriorData1D::zero();
}

/// Long-format x,y,g samples of a tensor mesh.
fraclap::ExteriorData2D exterior_2d(const RunConfig& c) {
    const auto& e = c.exterior;
    if (e.kind == "dyda") return fraclap::dyda_exterior_2d(c.P, fraclap::FracOrder(c.s), e.radius, c.L);
    if (e.kind == "table") {
        const auto cols = fraclap::io::read_numeric_csv(e.file, 3);
        std::map<double, std::map<double, double>> table;
        for (std::size_t k = 0; k < cols[0].size(); ++k) table[cols[0][k]][cols[1][k]] = cols[2][k];
        std::vector<double> xs, ys, values;
        for (const auto& [x, row] : table) {
            xs.push_back(x);
            if (ys.empty()) {
                for (const auto& [y, v] : row) ys.push_back(y);
            }
            if (row.size() != ys.size()) throw ConfigError("exterior table must cover a full x-y tensor mesh");
            for (const auto& [y, v] : row) values.push_back(v);
        }
        return fraclap::tabulated_exterior_2d(std::move(xs), std::move(ys), std::move(values), c.L);
    }
    return fraclap::ExteriorData2D::zero();
}

int cmd_solve(const Overrides& o) {
    RunConfig c = build_config(o);
    if (c.N == 0) c.N = 64;
    fraclap::config::validate(c);
    const fraclap::FracOrder s(c.s);
    const double radius = c.exterior.radius;
    if (c.rhs == "dyda" && c.L > radius) throw ConfigError("config: rhs 'dyda' needs L <= exterior.radius");
    // The closed form applies when the exterior data agree with u outside the domain.
    const bool analytic = c.rhs == "dyda" && (c.exterior.kind == "dyda" || c.L == radius);

    const fs::path dir = prepare_output(o, c);
    std::ofstream journal(dir / "journal.log", std::ios::binary);
    fraclap::SolverOptions options{c.tol > 0.0 ? c.tol : (c.dim == 1 ? 1e-10 : 1e-8), c.max_iter,
                                   [&](int it, double res) { journal << it << ' ' << fraclap::io::sci(res) << '\n'; }};

    fraclap::SolveReport report;
    nlohmann::json summary{{"dim", c.dim}, {"s", c.s}, {"P", c.P}, {"N", c.N}, {"L", c.L}, {"rhs", c.rhs},
                           {"exterior", c.exterior.kind}};
    const fraclap::Norm norm = parse_norm(c.norm);
    if (c.dim == 1) {
        const fraclap::Grid1D grid(c.L, c.N);
        const fraclap::analytic::DydaSolution exact{c.P, s, radius};
        std::function<double(double)> f = [&](double x) { return exact.f(x); };
        if (c.rhs == "zero") f = [](double) { return 0.0; };
        if (c.rhs == "constant") f = [v = c.rhs_value](double) { return v; };
        const auto system = fraclap::make_system_1d(fraclap::weights_1d(grid, s), exterior_1d(c), f, quad_of(c));
        report = fraclap::solve_dirichlet(system, options);
        summary["h"] = grid.h();
        if (analytic) {
            const auto u = fraclap::detail::sample_interior(grid, [&](double x) { return exact.u(x); });
            summary["error"] = fraclap::error_norm(report.U, u, norm, grid.h(), 1);
        }
        write_with(dir / "solution.csv", [&](std::ostream& out) { fraclap::io::write_solution_csv(out, grid, report.U); });
    } else {
        const fraclap::Grid2D grid(c.L, c.N);
        const fraclap::analytic::DydaSolution2D exact{c.P, s, radius};
        std::function<double(double, double)> f = [&](double x, double y) {
            return x * x + y * y < radius * radius ? exact.f(x, y) : 0.0;
        };
        if (c.rhs == "zero") f = [](double, double) { return 0.0; };
        if (c.rhs == "constant") f = [v = c.rhs_value](double, double) { return v; };
        const auto kernel = fraclap::weights_2d(grid, s, c.theta, c.c00, quad_of(c));
        const auto system = fraclap::make_system_2d(kernel, exterior_2d(c), f, quad_of(c));
        report = fraclap::solve_dirichlet(system, options);
        summary["h"] = grid.h();
        summary["theta"] = c.theta;
        summary["c00"] = c.c00;
        if (analytic) {
            const auto u = fraclap::detail::sample_interior(grid, [&](double x, double y) { return exact.u(x, y); });
            summary["error"] = fraclap::error_norm(report.U, u, norm, grid.h(), 2);
        }
        write_with(dir / "solution.csv", [&](std::ostream& out) { fraclap::io::write_solution_csv(out, grid, report.U); });
    }
    summary["norm"] = c.norm;
    summary["report"] = fraclap::io::to_json(report);
    write_json(dir / "report.json", summary);

    std::cerr << "solve: " << fraclap::to_string(report.method) << " " << report.iterations << " iterations, residual "
              << fraclap::io::sci(report.residual);
    if (summary.contains("error")) std::cerr << ", error " << fraclap::io::sci(summary["error"].get<double>());
    std::cerr << "\n";
    if (!report.converged) {
        std::cerr << "solve: did not converge within the iteration limit\n";
        return not_converged;
    }
    if (!report.conditions_hold) {
        std::cerr << "solve: warning: stencil conditions do not hold\n";
        if (c.strict) return condition_failure;
    }
    return ok;
}

// ---------------------------------------------------------------------------
// study
// ---------------------------------------------------------------------------

/// Restricts or extends the case list by the --s, --theta, --c00, --kappa and --P flags.
void apply_case_overrides(RunConfig& c, const Overrides& o) {
    using fraclap::config::CaseSpec;
    if (!o.s_list.empty()) {
        std::vector<CaseSpec> picked;
        for (double s : o.s_list) {
            bool found = false;
            for (const CaseSpec& cs : c.cases) {
                if (std::abs(cs.s - s) < 1e-12) {
                    picked.push_back(cs);
                    found = true;
                }
            }
            if (!found) {
                CaseSpec cs = c.cases.front();
                cs.s = s;
                if (c.experiment == "table1") cs.P = 2.0 - s;
                picked.push_back(cs);
            }
        }
        c.cases = std::move(picked);
    }
    for (CaseSpec& cs : c.cases) {
        if (o.theta) cs.theta = *o.theta;
        if (o.c00) cs.c00 = *o.c00;
        if (o.P) cs.P = *o.P;
    }
    if (!o.kappa_list.empty()) {
        std::vector<CaseSpec> crossed;
        std::vector<double> seen;
        for (const CaseSpec& cs : c.cases) {
            if (std::find(seen.begin(), seen.end(), cs.s) != seen.end()) continue;
            seen.push_back(cs.s);
            for (double k : o.kappa_list) {
                CaseSpec next = cs;
                next.kappa = k;
                crossed.push_back(next);
            }
        }
        c.cases = std::move(crossed);
    }
}

fraclap::StudyOptions study_options(const RunConfig& c) {
    fraclap::StudyOptions opts;
    opts.norm = parse_norm(c.norm);
    opts.solver = fraclap::SolverOptions{c.tol > 0.0 ? c.tol : 1e-12, c.max_iter, {}};
    opts.quad = quad_of(c);
    opts.reference_N = c.N_ref;
    return opts;
}

int run_tables(const RunConfig& c, const fs::path& dir) {
    const auto opts = study_options(c);
    const std::string& e = c.experiment;
    const bool truncation = e == "table1" || e == "table5";
    std::vector<fraclap::RateTable> tables;
    nlohmann::json list = nlohmann::json::array();
    for (const auto& cs : c.cases) {
        const fraclap::StudyCase sc{c.dim, cs.s, cs.P, cs.theta, cs.c00, c.L, c.exterior.radius};
        std::cerr << e << ": s = " << cs.s << (c.dim == 2 ? ", theta = " + fraclap::io::num(cs.theta) : "") << "\n";
        tables.push_back(truncation ? fraclap::run_truncation_study(sc, c.N_list, opts)
                                    : fraclap::run_convergence_study(sc, c.N_list, opts));
        for (const auto& row : tables.back().rows) {
            std::cerr << "  N = " << row.N << "  error " << fraclap::io::sci(row.error);
            if (row.rate) std::cerr << "  rate " << fraclap::io::num(std::round(*row.rate * 1e4) / 1e4);
            std::cerr << "\n";
        }
        list.push_back(fraclap::io::to_json(tables.back()));
    }
    write_with(dir / (e + ".csv"), [&](std::ostream& out) { fraclap::io::write_rate_tables_csv(out, tables); });
    write_json(dir / (e + ".json"), nlohmann::json{{"experiment", e}, {"tables", list}});
    return ok;
}

int run_theta_region(const RunConfig& c, const fs::path& dir) {
    const auto s_grid = fraclap::uniform_grid(c.scan.s_min, c.scan.s_max, c.scan.s_step, true);
    const auto theta_grid = fraclap::uniform_grid(c.scan.theta_min, c.scan.theta_max, c.scan.theta_step);
    nlohmann::json maps = nlohmann::json::array();
    for (const auto& cs : c.cases) {
        std::cerr << "theta-region: c00 = " << cs.c00 << ", " << s_grid.size() << " x " << theta_grid.size() << "\n";
        const auto map = fraclap::theta_feasibility_scan(s_grid, theta_grid, cs.c00, c.scan.N_probe, quad_of(c));
        write_with(dir / ("theta-region_c00_" + fraclap::io::num(cs.c00) + ".dat"),
                   [&](std::ostream& out) { fraclap::io::write_feasibility_gnuplot(out, map); });
        maps.push_back(fraclap::io::to_json(map));
    }
    write_json(dir / "theta-region.json", nlohmann::json{{"experiment", "theta-region"}, {"maps", maps}});
    return ok;
}

int run_exit_time(const RunConfig& c, const fs::path& dir) {
    const auto opts = study_options(c);
    std::vector<fraclap::ExitTimeResult> results;
    for (const auto& cs : c.cases) {
        auto r = fraclap::run_exit_time_study({cs.s}, {cs.kappa}, c.N, cs.c00, cs.theta, opts);
        const fraclap::Grid2D grid(1.0, c.N);
        write_with(dir / ("exit-time_s" + fraclap::io::num(cs.s) + "_kappa" + fraclap::io::num(cs.kappa) + ".dat"),
                   [&](std::ostream& out) { fraclap::io::write_field_gnuplot(out, grid, r.front().U); });
        std::cerr << "exit-time: s = " << cs.s << ", kappa = " << cs.kappa << ": max "
                  << fraclap::io::sci(r.front().max_value) << "\n";
        results.push_back(std::move(r.front()));
    }
    write_with(dir / "exit-time-summary.csv",
               [&](std::ostream& out) { fraclap::io::write_exit_time_summary_csv(out, results); });
    nlohmann::json entries = nlohmann::json::array();
    bool all_hold = true;
    for (std::size_t k = 0; k < results.size(); ++k) {
        const auto& r = results[k];
        all_hold = all_hold && r.conditions_hold;
        entries.push_back({{"s", r.s},
                           {"kappa", r.kappa},
                           {"theta", c.cases[k].theta},
                           {"c00", c.cases[k].c00},
                           {"N", r.N},
                           {"max", r.max_value},
                           {"center", r.center_value},
                           {"boundary_layer", r.boundary_layer},
                           {"dominance_margin", r.dominance_margin},
                           {"conditions_hold", r.conditions_hold},
                           {"iterations", r.iterations},
                           {"method", fraclap::to_string(r.method)}});
    }
    write_json(dir / "exit-time.json", nlohmann::json{{"experiment", "exit-time"}, {"results", entries}});
    if (!all_hold) {
        std::cerr << "exit-time: warning: stencil conditions fail for some case\n";
        if (c.strict) return condition_failure;
    }
    return ok;
}

int cmd_study(const Overrides& o) {
    RunConfig c = build_config(o);
    if (!o.experiment.empty()) c.experiment = o.experiment;
    if (c.experiment.empty()) throw ConfigError("study: no experiment given (positional argument or config key)");
    fraclap::config::apply_study_defaults(c);
    apply_case_overrides(c, o);
    if (c.N == 0) c.N = 64;
    fraclap::config::validate(c);
    if (c.cases.empty()) throw ConfigError("study: no cases selected");
    if (c.experiment != "theta-region") {
        for (const auto& cs : c.cases) (void)fraclap::FracOrder(cs.s);
    }
    const fs::path dir = prepare_output(o, c);
    if (c.experiment == "theta-region") return run_theta_region(c, dir);
    if (c.experiment == "exit-time") return run_exit_time(c, dir);
    return run_tables(c, dir);
}

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app->add_option("--out", o.out, "output directory")->capture_default_str();
    app->add_option("--dim", o.dim, "spatial dimension (1 or 2)");
    app->add_option("--L", o.L, "domain half-width");
    app->add_option("--tol", o.tol, "relative residual tolerance");
    app->add_option("--max-iter", o.max_iter, "iteration limit (0: 10 x unknowns)");
    app->add_option("--norm", o.norm, "error norm")->check(CLI::IsMember({"inf", "l2"}));
    app->add_option("--seed", o.seed, "seed for random-vector checks");
    app->add_flag("--no-strict", o.no_strict, "do not fail when stencil conditions are violated");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fraclap: finite-difference solver for the integral fractional Laplacian"};
    app.require_subcommand(1);
    Overrides o;

    auto* weights = app.add_subcommand("weights", "write stencil weights and the condition report");
    add_common(weights, o);
    weights->add_option("--s", o.s, "fractional order");
    weights->add_option("--n", o.N, "subintervals per axis");
    weights->add_option("--theta", o.theta, "2D stencil blend");
    weights->add_option("--c00", o.c00, "2D central correction");
    weights->add_flag("--dump-matrix", o.dump_matrix, "also write the dense matrix (N <= 64)");

    auto* solve = app.add_subcommand("solve", "solve one Dirichlet problem");
    add_common(solve, o);
    solve->add_option("--s", o.s, "fractional order");
    solve->add_option("--P", o.P, "exponent of the closed-form solution");
    solve->add_option("--n", o.N, "subintervals per axis");
    solve->add_option("--theta", o.theta, "2D stencil blend");
    solve->add_option("--c00", o.c00, "2D central correction");
    solve->add_option("--rhs", o.rhs, "right-hand side")->check(CLI::IsMember({"dyda", "zero", "constant"}));
    solve->add_option("--rhs-value", o.rhs_value, "value for --rhs constant");
    solve->add_option("--exterior", o.exterior, "exterior data")->check(CLI::IsMember({"zero", "dyda", "table"}));
    solve->add_option("--radius", o.radius, "support radius of the closed-form solution");
    solve->add_option("--exterior-file", o.exterior_file, "CSV samples for --exterior table");

    auto* study = app.add_subcommand("study", "run a refinement study, feasibility scan or exit-time study");
    add_common(study, o);
    study->add_option("experiment", o.experiment, "study kind")
        ->check(CLI::IsMember(fraclap::config::study_kinds()));
    study->add_option("--s", o.s_list, "restrict to these s values")->delimiter(',');
    study->add_option("--n-list", o.N_list, "refinement list")->delimiter(',');
    study->add_option("--n", o.N, "grid size for exit-time");
    study->add_option("--n-ref", o.N_ref, "reference N for 2D solve studies");
    study->add_option("--P", o.P, "exponent for every case");
    study->add_option("--theta", o.theta, "stencil blend for every case");
    study->add_option("--c00", o.c00, "central correction for every case");
    study->add_option("--kappa", o.kappa_list, "potential strengths for exit-time")->delimiter(',');
    study->add_option("--s-step", o.s_step, "feasibility scan step in s");
    study->add_option("--theta-step", o.theta_step, "feasibility scan step in theta");
    study->add_option("--probe-n", o.probe_N, "feasibility probe grid size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : usage;
    }

    try {
        if (weights->parsed()) return cmd_weights(o);
        if (solve->parsed()) return cmd_solve(o);
        return cmd_study(o);
    } catch (const std::invalid_argument& e) {  // ConfigError, ShapeMismatch
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const std::domain_error& e) {  // excluded or out-of-range parameters
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const fraclap::NotConverged& e) {
        std::cerr << "error: " << e.what() << "\n";
        return not_converged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return failure;
    }
}
