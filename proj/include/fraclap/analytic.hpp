#pragma once

// Closed-form reference pairs (u, (-Delta)^s u) used as benchmarks.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fraclap/errors.hpp"
#include "fraclap/grid.hpp"

namespace fraclap::analytic {

/// Evaluation route for the Gauss hypergeometric function.
enum class Hyp2F1Route {
    automatic,   ///< direct series for z <= 1/2, connection formula about z = 1 beyond
    direct,      ///< Maclaurin series in z
    pfaff,       ///< (1-z)^{-b} 2F1(b, c-a; c; z/(z-1)); convergent for z < 1/2
    euler,       ///< (1-z)^{c-a-b} 2F1(c-a, c-b; c; z)
    reflection,  ///< connection formula in 1 - z; needs c - a - b non-integer
};

namespace detail {

inline bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::nearbyint(x); }

/// 1 / Gamma(x), zero at the poles.
inline double reciprocal_gamma(double x) { return is_nonpositive_integer(x) ? 0.0 : 1.0 / std::tgamma(x); }

/// Maclaurin series for |z| < 1 (or any z when a or b terminates the series).
inline double hyp2f1_series(double a, double b, double c, double z) {
    constexpr int max_terms = 1'000'000;
    constexpr double rel_tol = 1e-17;
    double term = 1.0;
    double sum = 1.0;
    int small_streak = 0;
    for (int n = 0; n < max_terms; ++n) {
        if (a + n == 0.0 || b + n == 0.0) return sum;
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
        sum += term;
        if (std::abs(term) <= rel_tol * std::abs(sum)) {
            if (++small_streak == 2) return sum;
        } else {
            small_streak = 0;
        }
    }
    throw ToleranceNotReached("2F1 series did not converge within 1e6 terms (z = " + std::to_string(z) + ")");
}

}  // namespace detail

/// Gauss hypergeometric function 2F1(a, b; c; z) for real arguments, z in [0, 1).
[[nodiscard]] inline double gauss_2f1(double a, double b, double c, double z,
                                      Hyp2F1Route route = Hyp2F1Route::automatic) {
    using detail::hyp2f1_series;
    if (detail::is_nonpositive_integer(c)) {
        throw std::domain_error("2F1: c must not be a nonpositive integer");
    }
    if (!(z < 1.0) || !std::isfinite(z)) {
        throw std::domain_error("2F1: argument must satisfy z < 1");
    }
    const bool terminating = detail::is_nonpositive_integer(a) || detail::is_nonpositive_integer(b);
    const double gap = c - a - b;

    if (route == Hyp2F1Route::automatic) {
        if (terminating || z <= 0.5) {
            route = Hyp2F1Route::direct;
        } else if (std::abs(gap - std::nearbyint(gap)) > 1e-6) {
            route = Hyp2F1Route::reflection;
        } else {
            route = Hyp2F1Route::euler;
        }
    }

    switch (route) {
        case Hyp2F1Route::direct:
            return hyp2f1_series(a, b, c, z);
        case Hyp2F1Route::pfaff:
            return std::pow(1.0 - z, -b) * hyp2f1_series(b, c - a, c, z / (z - 1.0));
        case Hyp2F1Route::euler:
            return std::pow(1.0 - z, gap) * hyp2f1_series(c - a, c - b, c, z);
        case Hyp2F1Route::reflection: {
            if (std::abs(gap - std::nearbyint(gap)) < 1e-12) {
                throw std::domain_error("2F1: reflection route needs c - a - b non-integer");
            }
            const double w = 1.0 - z;
            const double first = std::tgamma(c) * std::tgamma(gap) * detail::reciprocal_gamma(c - a) *
                                 detail::reciprocal_gamma(c - b);
            const double second = std::tgamma(c) * std::tgamma(-gap) * detail::reciprocal_gamma(a) *
                                  detail::reciprocal_gamma(b);
            double value = 0.0;
            if (first != 0.0) value += first * hyp2f1_series(a, b, 1.0 - gap, w);
            if (second != 0.0) value += second * std::pow(w, gap) * hyp2f1_series(c - a, c - b, 1.0 + gap, w);
            return value;
        }
        case Hyp2F1Route::automatic:
            break;
    }
    throw std::logic_error("2F1: unreachable route");
}

/// Dyda's family u(x) = (1 - (x/r)^2)_+^{P+s} on the interval (-r, r).
struct DydaSolution {
    double P;
    FracOrder s;
    double radius = 1.0;

    [[nodiscard]] double u(double x) const {
        const double t = x / radius;
        if (std::abs(t) >= 1.0) return 0.0;
        return std::pow(1.0 - t * t, P + s.value());
    }

    /// (-Delta)^s u at |x| < r.
    [[nodiscard]] double f(double x) const;
};

/// (-Delta)^s of (1 - x^2)_+^{P+s} at |x| < 1.
[[nodiscard]] inline double dyda_f(double x, double P, FracOrder s) {
    if (!(std::abs(x) < 1.0)) {
        throw std::domain_error("dyda_f is defined for |x| < 1 only");
    }
    const double sv = s.value();
    const double prefactor = std::pow(2.0, 2.0 * sv) * std::tgamma(0.5 + sv) * std::tgamma(P + 1.0 + sv) /
                             (std::sqrt(std::numbers::pi) * std::tgamma(P + 1.0));
    return prefactor * gauss_2f1(0.5 + sv, -P, 0.5, x * x);
}

inline double DydaSolution::f(double x) const {
    return std::pow(radius, -2.0 * s.value()) * dyda_f(x / radius, P, s);
}

/// (-Delta)^s of (1 - |x|^2)_+^{P+s} in n dimensions, as a function of |x|^2 < 1.
[[nodiscard]] inline double dyda_f_radial(double r2, double P, FracOrder s, int n) {
    if (!(r2 >= 0.0 && r2 < 1.0)) throw std::domain_error("dyda_f_radial is defined for |x| < 1 only");
    if (n < 1) throw std::domain_error("dyda_f_radial: dimension must be positive");
    const double sv = s.value();
    const double half_n = 0.5 * n;
    const double prefactor = std::pow(4.0, sv) * std::tgamma(P + 1.0 + sv) * std::tgamma(half_n + sv) /
                             (std::tgamma(P + 1.0) * std::tgamma(half_n));
    return prefactor * gauss_2f1(half_n + sv, -P, half_n, r2);
}

/// Radial analogue of DydaSolution in two dimensions.
struct DydaSolution2D {
    double P;
    FracOrder s;
    double radius = 1.0;

    [[nodiscard]] double u(double x, double y) const {
        const double t = (x * x + y * y) / (radius * radius);
        return t < 1.0 ? std::pow(1.0 - t, P + s.value()) : 0.0;
    }
    [[nodiscard]] double f(double x, double y) const {
        return std::pow(radius, -2.0 * s.value()) * dyda_f_radial((x * x + y * y) / (radius * radius), P, s, 2);
    }
};

/// Two-dimensional benchmark ((1 - x^2)(1 - y^2))^2 on (-1, 1)^2, zero outside.
[[nodiscard]] inline double benchmark_2d(double x, double y) {
    if (std::abs(x) >= 1.0 || std::abs(y) >= 1.0) return 0.0;
    const double v = (1.0 - x * x) * (1.0 - y * y);
    return v * v;
}

}  // namespace fraclap::analytic
