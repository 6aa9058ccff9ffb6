#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fraclap {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre nodes and weights by Newton iteration on P_n.
[[nodiscard]] inline GaussRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("Gauss-Legendre order must be positive");
    // returns {P_n(x), P_n'(x)}
    auto legendre = [n](double x) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
    };
    GaussRule rule{std::vector<double>(n), std::vector<double>(n)};
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, dp] = legendre(x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = legendre(x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.weights[i] = w;
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

/// Integrates f over [a, b] with a fixed Gauss rule.
template <class F>
[[nodiscard]] double integrate_gauss(const GaussRule& rule, F&& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
    }
    return half * sum;
}

}  // namespace fraclap
