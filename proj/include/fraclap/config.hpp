#pragma once

// Run configuration for the command-line front end: a JSON document with a
// fixed schema. Unknown keys and wrong types are rejected with the key path.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraclap/kernel_weights.hpp"

namespace fraclap::config {

class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// One study configuration. Unused fields keep their defaults.
struct CaseSpec {
    double s = 0.5;
    double P = 1.0;
    double theta = 1.0;
    double c00 = 0.0;
    double kappa = 0.0;

    friend bool operator==(const CaseSpec&, const CaseSpec&) = default;
};

struct ScanSpec {
    double s_min = 0.01;
    double s_max = 0.99;
    double s_step = 0.01;
    double theta_min = 0.0;
    double theta_max = 1.0;
    double theta_step = 0.01;
    int N_probe = 16;
};

struct ExteriorSpec {
    std::string kind = "zero";  ///< zero | dyda | table
    double radius = 1.0;        ///< dyda support radius
    std::string file;           ///< table: CSV with columns x,g (1D) or x,y,g (2D)
};

struct RunConfig {
    std::string experiment;  ///< study kind; empty for weights and solve
    int dim = 1;
    double s = 0.7;
    double P = 1.0;
    double theta = 1.0;
    double c00 = 0.0;
    double L = 1.0;
    int N = 0;  ///< 0 picks the command default: 64, or 128 for the exit-time study
    std::vector<int> N_list;
    int N_ref = 0;  ///< 2D solve studies; 0 means 4x the finest N
    std::vector<CaseSpec> cases;
    ScanSpec scan;
    double tol = 0.0;  ///< relative residual; 0 picks 1e-10 (1D) or 1e-8 (2D), 1e-12 in studies
    int max_iter = 0;
    QuadratureConfig quadrature;
    std::string norm = "inf";  ///< inf | l2
    std::string rhs = "dyda";  ///< dyda | zero | constant
    double rhs_value = 1.0;
    ExteriorSpec exterior;
    std::uint64_t seed = 20240601;
    bool strict = true;
};

inline const std::vector<std::string>& study_kinds() {
    static const std::vector<std::string> kinds{"table1", "table2",       "table3",   "table4", "table5",
                                                "table6", "theta-region", "exit-time"};
    return kinds;
}

namespace detail {

/// Walks one JSON object, checking types and recording which keys were read.
class ObjectReader {
public:
    ObjectReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where("") + "expected an object");
    }

    void number(const char* key, double& out) {
        if (const auto* v = find(key)) {
            if (!v->is_number()) throw ConfigError(where(key) + "expected a number");
            out = v->get<double>();
            if (!std::isfinite(out)) throw ConfigError(where(key) + "must be finite");
        }
    }
    void integer(const char* key, int& out) {
        if (const auto* v = find(key)) {
            if (!v->is_number_integer()) throw ConfigError(where(key) + "expected an integer");
            out = v->get<int>();
        }
    }
    void unsigned_integer(const char* key, std::uint64_t& out) {
        if (const auto* v = find(key)) {
            if (!v->is_number_unsigned()) throw ConfigError(where(key) + "expected a nonnegative integer");
            out = v->get<std::uint64_t>();
        }
    }
    void boolean(const char* key, bool& out) {
        if (const auto* v = find(key)) {
            if (!v->is_boolean()) throw ConfigError(where(key) + "expected true or false");
            out = v->get<bool>();
        }
    }
    void string(const char* key, std::string& out, std::initializer_list<const char*> allowed = {}) {
        if (const auto* v = find(key)) {
            if (!v->is_string()) throw ConfigError(where(key) + "expected a string");
            out = v->get<std::string>();
            if (allowed.size() > 0 &&
                std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return out == a; })) {
                std::string list;
                for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
                throw ConfigError(where(key) + "unknown value '" + out + "', expected one of: " + list);
            }
        }
    }
    void integer_list(const char* key, std::vector<int>& out) {
        if (const auto* v = find(key)) {
            if (!v->is_array()) throw ConfigError(where(key) + "expected an array of integers");
            out.clear();
            for (const auto& e : *v) {
                if (!e.is_number_integer()) throw ConfigError(where(key) + "expected an array of integers");
                out.push_back(e.get<int>());
            }
        }
    }
    template <class Fn>
    void object(const char* key, Fn&& fn) {
        if (const auto* v = find(key)) {
            ObjectReader sub(*v, path_ + key + ".");
            fn(sub);
            sub.finish();
        }
    }
    template <class Fn>
    void object_list(const char* key, Fn&& fn) {
        if (const auto* v = find(key)) {
            if (!v->is_array()) throw ConfigError(where(key) + "expected an array of objects");
            for (std::size_t k = 0; k < v->size(); ++k) {
                ObjectReader sub((*v)[k], path_ + key + "[" + std::to_string(k) + "].");
                fn(sub);
                sub.finish();
            }
        }
    }

    /// Rejects keys that no accessor asked for.
    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.contains(key)) throw ConfigError(where(key) + "unknown key");
        }
    }

private:
    const nlohmann::json* find(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    [[nodiscard]] std::string where(const std::string& key) const { return "config: " + path_ + key + ": "; }

    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

}  // namespace detail

/// Reads a config document over the defaults. Throws ConfigError with the offending key.
[[nodiscard]] inline RunConfig from_json(const nlohmann::json& j) {
    RunConfig c;
    detail::ObjectReader r(j, "");
    r.string("experiment", c.experiment,
             {"", "table1", "table2", "table3", "table4", "table5", "table6", "theta-region", "exit-time"});
    r.integer("dim", c.dim);
    r.number("s", c.s);
    r.number("P", c.P);
    r.number("theta", c.theta);
    r.number("c00", c.c00);
    r.number("L", c.L);
    r.integer("N", c.N);
    r.integer_list("N_list", c.N_list);
    r.integer("N_ref", c.N_ref);
    r.object_list("cases", [&](detail::ObjectReader& o) {
        CaseSpec cs;
        o.number("s", cs.s);
        o.number("P", cs.P);
        o.number("theta", cs.theta);
        o.number("c00", cs.c00);
        o.number("kappa", cs.kappa);
        c.cases.push_back(cs);
    });
    r.object("scan", [&](detail::ObjectReader& o) {
        o.number("s_min", c.scan.s_min);
        o.number("s_max", c.scan.s_max);
        o.number("s_step", c.scan.s_step);
        o.number("theta_min", c.scan.theta_min);
        o.number("theta_max", c.scan.theta_max);
        o.number("theta_step", c.scan.theta_step);
        o.integer("N_probe", c.scan.N_probe);
    });
    r.number("tol", c.tol);
    r.integer("max_iter", c.max_iter);
    r.object("quadrature", [&](detail::ObjectReader& o) {
        o.integer("gauss_order", c.quadrature.gauss_order);
        o.integer("grading_depth", c.quadrature.grading_depth);
        o.number("tol", c.quadrature.tol);
    });
    r.string("norm", c.norm, {"inf", "l2"});
    r.string("rhs", c.rhs, {"dyda", "zero", "constant"});
    r.number("rhs_value", c.rhs_value);
    r.object("exterior", [&](detail::ObjectReader& o) {
        o.string("kind", c.exterior.kind, {"zero", "dyda", "table"});
        o.number("radius", c.exterior.radius);
        o.string("file", c.exterior.file);
    });
    r.unsigned_integer("seed", c.seed);
    r.boolean("strict", c.strict);
    r.finish();
    return c;
}

/// Every field, in a fixed key order; the output location is not part of a config.
[[nodiscard]] inline nlohmann::ordered_json to_json(const RunConfig& c) {
    nlohmann::ordered_json cases = nlohmann::ordered_json::array();
    for (const CaseSpec& cs : c.cases) {
        cases.push_back(
            nlohmann::ordered_json{{"s", cs.s}, {"P", cs.P}, {"theta", cs.theta}, {"c00", cs.c00}, {"kappa", cs.kappa}});
    }
    nlohmann::ordered_json j;
    j["experiment"] = c.experiment;
    j["dim"] = c.dim;
    j["s"] = c.s;
    j["P"] = c.P;
    j["theta"] = c.theta;
    j["c00"] = c.c00;
    j["L"] = c.L;
    j["N"] = c.N;
    j["N_list"] = c.N_list;
    j["N_ref"] = c.N_ref;
    j["cases"] = std::move(cases);
    j["scan"] = nlohmann::ordered_json{{"s_min", c.scan.s_min},         {"s_max", c.scan.s_max},
                                       {"s_step", c.scan.s_step},       {"theta_min", c.scan.theta_min},
                                       {"theta_max", c.scan.theta_max}, {"theta_step", c.scan.theta_step},
                                       {"N_probe", c.scan.N_probe}};
    j["tol"] = c.tol;
    j["max_iter"] = c.max_iter;
    j["quadrature"] = nlohmann::ordered_json{{"gauss_order", c.quadrature.gauss_order},
                                             {"grading_depth", c.quadrature.grading_depth},
                                             {"tol", c.quadrature.tol}};
    j["norm"] = c.norm;
    j["rhs"] = c.rhs;
    j["rhs_value"] = c.rhs_value;
    j["exterior"] =
        nlohmann::ordered_json{{"kind", c.exterior.kind}, {"radius", c.exterior.radius}, {"file", c.exterior.file}};
    j["seed"] = c.seed;
    j["strict"] = c.strict;
    return j;
}

[[nodiscard]] inline RunConfig parse(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
    return from_json(j);
}

[[nodiscard]] inline RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

/// Fills the table and scan defaults for a study kind; fields already set are kept.
inline void apply_study_defaults(RunConfig& c) {
    const std::string& e = c.experiment;
    auto cases_from_s = [](std::initializer_list<double> s_values, auto&& make) {
        std::vector<CaseSpec> out;
        for (double s : s_values) out.push_back(make(s));
        return out;
    };
    auto set_list = [&](std::vector<int> defaults) {
        if (c.N_list.empty()) c.N_list = std::move(defaults);
    };
    if (e == "table1" || e == "table2" || e == "table3" || e == "table4") {
        c.dim = 1;
        if (e == "table3") {
            c.L = 0.5;
            c.exterior = {"dyda", 1.0, ""};
        } else {
            c.L = 1.0;
            c.exterior = {"zero", 1.0, ""};
        }
        set_list(e == "table4" ? std::vector<int>{256, 512, 1024, 2048} : std::vector<int>{128, 256, 512, 1024});
        if (c.cases.empty()) {
            if (e == "table1") c.cases = cases_from_s({0.2, 0.4, 0.6, 0.8}, [](double s) { return CaseSpec{s, 2.0 - s}; });
            if (e == "table2") c.cases = cases_from_s({0.1, 0.2, 0.3, 0.6}, [](double s) { return CaseSpec{s, 1.0}; });
            if (e == "table3") c.cases = cases_from_s({0.2, 0.3, 0.6, 0.7}, [](double s) { return CaseSpec{s, 0.0}; });
            if (e == "table4") c.cases = cases_from_s({0.2, 0.4, 0.6, 0.8}, [](double s) { return CaseSpec{s, 0.0}; });
        }
    } else if (e == "table5" || e == "table6") {
        c.dim = 2;
        c.L = 1.0;
        c.exterior = {"zero", 1.0, ""};
        if (e == "table5") {
            set_list({64, 128});
            if (c.cases.empty()) c.cases = {{0.3, 0, 0.0, 0}, {0.3, 0, 1.0, 0}, {0.8, 0, 0.0, 0}, {0.8, 0, 1.0, 0}};
        } else {
            set_list({64, 128, 256});
            if (c.cases.empty()) c.cases = {{0.2, 0, 0.5, 1}, {0.3, 0, 0.5, 1}, {0.4, 0, 1.0, 0}, {0.8, 0, 1.0, 0}};
        }
    } else if (e == "theta-region") {
        c.dim = 2;
        if (c.cases.empty()) c.cases = {CaseSpec{0.5, 0, 0, 1.0}};
    } else if (e == "exit-time") {
        c.dim = 2;
        c.L = 1.0;
        c.exterior = {"zero", 1.0, ""};
        if (c.N == 0) c.N = 128;
        if (c.cases.empty()) {
            for (double s : {0.2, 0.4, 0.6, 0.8}) c.cases.push_back({s, 0, 0.5, 100, 0.5});
            for (double k : {0.25, 1.0, 4.0, 8.0}) c.cases.push_back({0.6, 0, 0.5, 100, k});
        }
    } else {
        throw ConfigError("config: unknown study kind '" + e + "'");
    }
}

/// Range and consistency checks shared by all commands.
inline void validate(const RunConfig& c) {
    if (c.dim != 1 && c.dim != 2) throw ConfigError("config: dim: must be 1 or 2");
    if (!(c.L > 0.0)) throw ConfigError("config: L: must be positive");
    if (c.N < 4) throw ConfigError("config: N: must be at least 4");
    if (c.scan.N_probe < 16) throw ConfigError("config: scan.N_probe: must be at least 16");
    if (c.tol < 0.0) throw ConfigError("config: tol: must be nonnegative");
    if (c.max_iter < 0) throw ConfigError("config: max_iter: must be nonnegative");
    if (c.quadrature.gauss_order < 1 || c.quadrature.grading_depth < 1 || !(c.quadrature.tol > 0.0)) {
        throw ConfigError("config: quadrature: gauss_order and grading_depth must be >= 1, tol > 0");
    }
    if (!(c.exterior.radius > 0.0)) throw ConfigError("config: exterior.radius: must be positive");
    if (c.exterior.kind == "table" && c.exterior.file.empty()) {
        throw ConfigError("config: exterior.file: required for a tabulated exterior");
    }
    if (!(c.scan.s_step > 0.0 && c.scan.theta_step > 0.0)) throw ConfigError("config: scan: steps must be positive");
    for (int N : c.N_list) {
        if (N < 4) throw ConfigError("config: N_list: entries must be at least 4");
    }
}

}  // namespace fraclap::config
