#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library numerics: constants come from extended-precision Gamma values,
// moments from adaptive quadrature of their defining integrals, and matrices
// are assembled entry by entry.

#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/hypergeometric_pFq.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using mp = boost::multiprecision::cpp_bin_float_50;

/// Constant of (-Delta)^{s'} in n dimensions. For 0 < s' < 1 the hypersingular
/// constant 4^{s'} s' Gamma(n/2 + s') / (pi^{n/2} Gamma(1 - s')); for s' < 0 the
/// Riesz potential constant 4^{s'} Gamma(n/2 + s') / (pi^{n/2} Gamma(-s')).
inline double splitting_constant(int n, double sp) {
    const mp s = sp;
    const mp half_n = mp(n) / 2;
    const mp pi_pow = boost::multiprecision::pow(boost::math::constants::pi<mp>(), half_n);
    const mp four_pow = boost::multiprecision::pow(mp(4), s);
    if (sp > 0) return static_cast<double>(four_pow * s * boost::math::tgamma(half_n + s) / (pi_pow * boost::math::tgamma(1 - s)));
    return static_cast<double>(four_pow * boost::math::tgamma(half_n + s) / (pi_pow * boost::math::tgamma(-s)));
}

/// 2F1 in 50-digit arithmetic.
inline double hyp2f1(double a, double b, double c, double z) {
    return static_cast<double>(
        boost::math::hypergeometric_pFq({mp(a), mp(b)}, {mp(c)}, mp(z)));
}

/// (-Delta)^s (1 - x^2)_+^{P+s} in one dimension.
inline double dyda_f(double x, double P, double s) {
    const mp sv = s, Pv = P;
    const mp pref = boost::multiprecision::pow(mp(4), sv) * boost::math::tgamma(mp(0.5) + sv) *
                    boost::math::tgamma(Pv + 1 + sv) /
                    (boost::multiprecision::sqrt(boost::math::constants::pi<mp>()) * boost::math::tgamma(Pv + 1));
    return static_cast<double>(pref) * hyp2f1(0.5 + s, -P, 0.5, x * x);
}

/// Adaptive tanh-sinh over [a, b]; f may be singular at either endpoint.
/// Nested integrals pass a distinct level so each uses its own integrator.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-14,
                        int level = 0) {
    if (!(b > a)) return 0.0;
    thread_local boost::math::quadrature::tanh_sinh<double> outer(15), inner(15);
    return (level == 0 ? outer : inner).integrate(f, a, b, tol);
}

/// Integral over [a, b] split at the given interior points.
inline double integrate_split(const std::function<double(double)>& f, double a, double b,
                              std::vector<double> cuts, double tol = 1e-14) {
    std::sort(cuts.begin(), cuts.end());
    double sum = 0.0, lo = a;
    for (double c : cuts) {
        if (c > lo && c < b) {
            sum += integrate(f, lo, c, tol);
            lo = c;
        }
    }
    return sum + integrate(f, lo, b, tol);
}

/// omega_bar_k = c_{1,s-1} int_{-h}^{h} |k h - y|^{1-2s} (1 - |y|/h) dy.
inline double omega_bar_1d(long k, double h, double s) {
    const double x = static_cast<double>(k) * h;
    auto f = [&](double y) {
        const double d = std::abs(x - y);
        return d == 0.0 ? 0.0 : std::pow(d, 1.0 - 2.0 * s) * (1.0 - std::abs(y) / h);
    };
    return splitting_constant(1, s - 1.0) * integrate_split(f, -h, h, {0.0, x});
}

/// omega_bar_{p,q} = c_{2,s-1} int int_{[-h,h]^2} |(p h + xi, q h + eta)|^{-2s} (1 - |xi|/h)(1 - |eta|/h),
/// by nested tanh-sinh over the four unit cells (h = 1 scaled out).
inline double omega_bar_2d(long p, long q, double h, double s) {
    const double P = static_cast<double>(p), Q = static_cast<double>(q);
    double total = 0.0;
    for (double sx : {-1.0, 1.0}) {
        for (double sy : {-1.0, 1.0}) {
            auto outer = [&](double xi) {
                const double X = P + sx * xi;
                auto inner = [&](double eta) {
                    const double Y = Q + sy * eta;
                    const double r2 = X * X + Y * Y;
                    return r2 == 0.0 ? 0.0 : std::pow(r2, -s) * (1.0 - eta);
                };
                return (1.0 - xi) * integrate(inner, 0.0, 1.0, 1e-13, 1);
            };
            total += integrate(outer, 0.0, 1.0, 1e-12);
        }
    }
    return splitting_constant(2, s - 1.0) * std::pow(h, 2.0 - 2.0 * s) * total;
}

/// Dense symmetric Toeplitz matrix with entries w[|i-j|].
inline Eigen::MatrixXd toeplitz(const std::vector<double>& w) {
    const auto n = static_cast<Eigen::Index>(w.size());
    Eigen::MatrixXd A(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) A(i, j) = w[static_cast<std::size_t>(std::abs(i - j))];
    return A;
}

/// Dense BTTB matrix over an m x m interior grid, quadrant stencil w(|di|, |dj|) row-major in di.
inline Eigen::MatrixXd bttb(const std::vector<double>& quadrant, long m) {
    Eigen::MatrixXd A(m * m, m * m);
    for (long i = 0; i < m; ++i)
        for (long j = 0; j < m; ++j)
            for (long p = 0; p < m; ++p)
                for (long q = 0; q < m; ++q)
                    A(i * m + j, p * m + q) = quadrant[static_cast<std::size_t>(std::abs(i - p) * m + std::abs(j - q))];
    return A;
}

/// Central-difference drift matrix for gradient (2 kappa x, 2 kappa y) on the
/// interior of [-1, 1]^2 with N subintervals, zero outside.
inline Eigen::MatrixXd drift(int N, double kappa) {
    const long m = N - 1;
    const double h = 2.0 / N;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m * m, m * m);
    auto idx = [m](long i, long j) { return (i - 1) * m + (j - 1); };
    for (long i = 1; i < N; ++i) {
        for (long j = 1; j < N; ++j) {
            const double bx = 2.0 * kappa * (-1.0 + i * h), by = 2.0 * kappa * (-1.0 + j * h);
            if (i + 1 < N) D(idx(i, j), idx(i + 1, j)) += bx / (2 * h);
            if (i - 1 > 0) D(idx(i, j), idx(i - 1, j)) -= bx / (2 * h);
            if (j + 1 < N) D(idx(i, j), idx(i, j + 1)) += by / (2 * h);
            if (j - 1 > 0) D(idx(i, j), idx(i, j - 1)) -= by / (2 * h);
        }
    }
    return D;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

inline double max_abs_diff(const std::vector<double>& a, const Eigen::VectorXd& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b(static_cast<Eigen::Index>(i))));
    return m;
}

}  // namespace oracle
