#pragma once

// Exterior Dirichlet data and the boundary vector R (with its discrete
// Laplacian image G) that the exterior datum contributes to the scheme.

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fraclap/errors.hpp"
#include "fraclap/grid.hpp"
#include "fraclap/kernel_weights.hpp"
#include "fraclap/parallel.hpp"

namespace fraclap {

/// Axis-aligned box [lo, hi] per axis.
struct Box1D {
    double lo = 0.0;
    double hi = 0.0;
};
struct Box2D {
    double x_lo = 0.0, x_hi = 0.0;
    double y_lo = 0.0, y_hi = 0.0;
};

/// Exterior datum g on the complement of [-L, L]. g must vanish inside the
/// domain and outside support; boundary gives the value used at x = +-L.
struct ExteriorData1D {
    std::function<double(double)> g;
    Box1D support;
    std::function<double(double)> boundary;
    bool is_zero = false;
    std::vector<double> breaks;  ///< points where g is not smooth; quadrature splits there

    [[nodiscard]] static ExteriorData1D zero() {
        return {[](double) { return 0.0; }, {0.0, 0.0}, [](double) { return 0.0; }, true, {}};
    }
};

/// Exterior datum on the complement of [-L, L]^2; boundary gives the frame values.
struct ExteriorData2D {
    std::function<double(double, double)> g;
    Box2D support;
    std::function<double(double, double)> boundary;
    bool is_zero = false;
    std::vector<double> x_breaks;  ///< lines x = const where g is not smooth
    std::vector<double> y_breaks;
    /// Optional y-extent of the support at a given x, for curved support edges.
    std::function<std::array<double, 2>(double)> y_range;

    [[nodiscard]] static ExteriorData2D zero() {
        return {[](double, double) { return 0.0; }, {}, [](double, double) { return 0.0; }, true, {}, {}, {}};
    }
};

/// (1 - (x/r)^2)^{P+s} restricted to L <= |x| < r; boundary values are its limit at +-L.
[[nodiscard]] inline ExteriorData1D dyda_exterior_1d(double P, FracOrder s, double radius, double L) {
    const double e = P + s.value();
    auto profile = [=](double x) {
        const double t = x / radius;
        return std::abs(t) < 1.0 ? std::pow(1.0 - t * t, e) : 0.0;
    };
    return {[=](double x) { return std::abs(x) < L ? 0.0 : profile(x); }, {-radius, radius}, profile, false, {}};
}

/// Radial analogue (1 - |x|^2 / r^2)^{P+s} outside [-L, L]^2.
[[nodiscard]] inline ExteriorData2D dyda_exterior_2d(double P, FracOrder s, double radius, double L) {
    const double e = P + s.value();
    auto profile = [=](double x, double y) {
        const double t = (x * x + y * y) / (radius * radius);
        return t < 1.0 ? std::pow(1.0 - t, e) : 0.0;
    };
    ExteriorData2D ext{[=](double x, double y) { return (std::abs(x) < L && std::abs(y) < L) ? 0.0 : profile(x, y); },
                       {-radius, radius, -radius, radius}, profile, false, {}, {}, {}};
    // the circle leaves the strips above and below the square here
    if (radius > L) {
        const double cross = std::sqrt(radius * radius - L * L);
        if (cross < L) ext.x_breaks = {-cross, cross};
    }
    ext.y_range = [radius](double x) {
        const double half = std::sqrt(std::max(0.0, radius * radius - x * x));
        return std::array<double, 2>{-half, half};
    };
    return ext;
}

/// Piecewise-linear interpolant of tabulated exterior values (xs ascending).
[[nodiscard]] inline ExteriorData1D tabulated_exterior_1d(std::vector<double> xs, std::vector<double> values,
                                                          double L) {
    if (xs.size() != values.size() || xs.size() < 2) throw std::invalid_argument("tabulated g needs >= 2 samples");
    if (!std::is_sorted(xs.begin(), xs.end())) throw std::invalid_argument("tabulated g positions must ascend");
    const Box1D box{xs.front(), xs.back()};
    std::vector<double> breaks = xs;
    auto interp = [xs = std::move(xs), values = std::move(values)](double x) {
        if (x < xs.front() || x > xs.back()) return 0.0;
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        if (it == xs.end()) return values.back();
        const std::size_t k = static_cast<std::size_t>(it - xs.begin());
        const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
        return (1.0 - t) * values[k - 1] + t * values[k];
    };
    return {[=](double x) { return std::abs(x) < L ? 0.0 : interp(x); }, box, interp, false, std::move(breaks)};
}

/// Bilinear interpolant on a tensor mesh; values row-major in x.
[[nodiscard]] inline ExteriorData2D tabulated_exterior_2d(std::vector<double> xs, std::vector<double> ys,
                                                          std::vector<double> values, double L) {
    if (xs.size() < 2 || ys.size() < 2 || values.size() != xs.size() * ys.size()) {
        throw std::invalid_argument("tabulated g needs an nx x ny value table with nx, ny >= 2");
    }
    if (!std::is_sorted(xs.begin(), xs.end()) || !std::is_sorted(ys.begin(), ys.end())) {
        throw std::invalid_argument("tabulated g positions must ascend");
    }
    const Box2D box{xs.front(), xs.back(), ys.front(), ys.back()};
    std::vector<double> x_breaks = xs, y_breaks = ys;
    auto locate = [](const std::vector<double>& v, double x) {
        auto it = std::upper_bound(v.begin(), v.end(), x);
        std::size_t k = static_cast<std::size_t>(it - v.begin());
        k = std::clamp<std::size_t>(k, 1, v.size() - 1);
        return std::pair{k - 1, (x - v[k - 1]) / (v[k] - v[k - 1])};
    };
    auto interp = [=, xs = std::move(xs), ys = std::move(ys), values = std::move(values)](double x, double y) {
        if (x < xs.front() || x > xs.back() || y < ys.front() || y > ys.back()) return 0.0;
        const auto [i, tx] = locate(xs, x);
        const auto [j, ty] = locate(ys, y);
        const std::size_t ny = ys.size();
        auto v = [&](std::size_t a, std::size_t b) { return values[a * ny + b]; };
        return (1 - tx) * (1 - ty) * v(i, j) + tx * (1 - ty) * v(i + 1, j) + (1 - tx) * ty * v(i, j + 1) +
               tx * ty * v(i + 1, j + 1);
    };
    return {[=](double x, double y) { return (std::abs(x) < L && std::abs(y) < L) ? 0.0 : interp(x, y); }, box,
            interp, false, std::move(x_breaks), std::move(y_breaks), {}};
}

/// R over all nodes (ghost frame included) and G = (-Delta)_h R at interior nodes.
/// 1D: R has N+1 entries. 2D: R is (N+1)^2 row-major in i, G follows Grid2D::interior_index.
struct BoundaryVector {
    std::vector<double> R;
    std::vector<double> G;
};

namespace detail {

/// Integrates f(y, y - a, b - y) over [a, b] by tanh-sinh; the two distances stay
/// accurate next to the endpoints, where the kernel may be singular.
/// With strict unset a missed tolerance is left to the enclosing integral,
/// whose own error estimate picks up any resulting noise.
template <class F>
double integrate_with_endpoint_distances(F&& f, double a, double b, const QuadratureConfig& quad, bool strict = true) {
    if (!(b > a)) return 0.0;
    // abscissa tables are costly to build, so each thread keeps one integrator per depth
    const std::size_t depth = static_cast<std::size_t>(std::max(quad.grading_depth, 4));
    thread_local std::optional<boost::math::quadrature::tanh_sinh<double>> cached;
    thread_local std::size_t cached_depth = 0;
    if (!cached || cached_depth != depth) {
        cached.emplace(depth);
        cached_depth = depth;
    }
    auto& integrator = *cached;
    const double length = b - a;
    double error = 0.0;
    double l1 = 0.0;
    const double value = integrator.integrate(
        [&](double y, double yc) {
            // boost passes yc = a - y near a (negative) and b - y elsewhere
            const double from_a = yc < 0.0 ? -yc : length - yc;
            const double to_b = yc < 0.0 ? length + yc : yc;
            return f(y, from_a, to_b);
        },
        a, b, quad.tol, &error, &l1);
    // The tanh-sinh estimate stalls near 1e-9 relative on short pieces far from
    // the origin (round-off in the abscissae), so only gross misses are errors.
    constexpr double negligible = 1e-20;
    const double accepted = std::max(1e3 * quad.tol, 1e-8) * l1;
    if (!std::isfinite(value) || (strict && !(error <= std::max(accepted, negligible)))) {
        char msg[160];
        std::snprintf(msg, sizeof msg, "exterior quadrature did not reach tol on [%.17g, %.17g]: error %.3g, L1 %.3g", a,
                      b, error, l1);
        throw ToleranceNotReached(msg);
    }
    return value;
}

/// [a, b] cut at every point strictly inside it. Cuts closer together than a
/// few ulps are merged by snapping the neighbouring endpoint onto the later
/// cut, so evaluation points stay exact endpoints and no sliver pieces appear.
inline std::vector<std::pair<double, double>> split_interval(double a, double b, std::vector<double> cuts) {
    std::sort(cuts.begin(), cuts.end());
    const double tiny = 64.0 * std::numeric_limits<double>::epsilon() * std::max({std::abs(a), std::abs(b), b - a});
    std::vector<std::pair<double, double>> parts;
    double lo = a;
    for (double c : cuts) {
        if (!(c > lo && c < b)) continue;
        if (c - lo <= tiny) {
            if (!parts.empty()) parts.back().second = c;
        } else {
            parts.emplace_back(lo, c);
        }
        lo = c;
    }
    // a last cut within tiny of b ends the range, dropping the sliver beyond it
    if (b - lo > tiny || parts.empty()) parts.emplace_back(lo, b);
    return parts;
}

/// |x0 - y| for y on [a, b] with x0 outside (a, b), accurate near the endpoints.
inline double distance_outside(double x0, double a, double b, double from_a, double to_b) {
    return x0 >= b ? (x0 - b) + to_b : (a - x0) + from_a;
}

/// int_0^1 |i - t|^a (1 - t) dt for integer i >= 0: the kernel moment of a
/// boundary half hat seen from i cells away.
inline double half_hat_moment(long i, double a) {
    if (i == 0) return 1.0 / ((a + 1.0) * (a + 2.0));
    if (i < 8) {
        const double hi = static_cast<double>(i);
        const double lo = hi - 1.0;
        return (std::pow(hi, a + 2.0) - std::pow(lo, a + 2.0)) / (a + 2.0) +
               (1.0 - hi) * (std::pow(hi, a + 1.0) - std::pow(lo, a + 1.0)) / (a + 1.0);
    }
    const double id = static_cast<double>(i);
    double binom = 1.0;
    double sum = 0.5;  // n = 0 term
    double inv_pow = 1.0;
    for (int n = 1; n < 200; ++n) {
        binom *= (a - n + 1) / n;
        inv_pow /= -id;
        const double term = binom * inv_pow / ((n + 1.0) * (n + 2.0));
        sum += term;
        if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    return std::pow(id, a) * sum;
}

}  // namespace detail

/// Boundary vector in 1D. R_i = c_{1,s-1} int |x_i - y|^{1-2s} (u_0 phi_0 + u_N phi_N + g) dy.
/// self_shift is added to the self weight of the two boundary nodes: R_0 += self_shift u_0,
/// R_N += self_shift u_N.
[[nodiscard]] inline BoundaryVector boundary_vector_1d(const Grid1D& grid, const ExteriorData1D& ext, FracOrder s,
                                                       const QuadratureConfig& quad = {}, double self_shift = 0.0) {
    const int N = grid.N;
    const double h = grid.h();
    const double L = grid.L;
    const double a = s.kernel_exponent_1d();
    const double c = splitting_constant(1, s.value() - 1.0);
    const double u_left = ext.boundary ? ext.boundary(-L) : 0.0;
    const double u_right = ext.boundary ? ext.boundary(L) : 0.0;
    const double hat_scale = std::pow(h, 1.0 + a);

    BoundaryVector out{std::vector<double>(static_cast<std::size_t>(N) + 1, 0.0),
                       std::vector<double>(static_cast<std::size_t>(N) - 1, 0.0)};
    if (ext.is_zero && u_left == 0.0 && u_right == 0.0) return out;

    const bool left_piece = !ext.is_zero && ext.support.lo < -L;
    const bool right_piece = !ext.is_zero && ext.support.hi > L;
    parallel_for(0, N + 1, [&](std::ptrdiff_t i) {
        const double x = grid.node(static_cast<int>(i));
        double value = hat_scale * (u_left * detail::half_hat_moment(i, a) + u_right * detail::half_hat_moment(N - i, a));
        auto piece = [&](double from, double to) {
            double sum = 0.0;
            for (const auto& [lo, hi] : detail::split_interval(from, to, ext.breaks)) {
                sum += detail::integrate_with_endpoint_distances(
                    [&](double y, double from_lo, double to_hi) {
                        const double d = detail::distance_outside(x, lo, hi, from_lo, to_hi);
                        return std::pow(d, a) * ext.g(y);
                    },
                    lo, hi, quad);
            }
            return sum;
        };
        if (left_piece) value += piece(ext.support.lo, -L);
        if (right_piece) value += piece(L, ext.support.hi);
        out.R[static_cast<std::size_t>(i)] = c * value;
    });
    out.R[0] += self_shift * u_left;
    out.R[static_cast<std::size_t>(N)] += self_shift * u_right;
    for (int i = 1; i < N; ++i) {
        out.G[i - 1] = -(out.R[i - 1] - 2.0 * out.R[i] + out.R[i + 1]) / (h * h);
    }
    return out;
}

/// Boundary vector matching a corrected kernel: when omega_bar_0 was zeroed,
/// the boundary nodes lose their self weight too, so the correction stays a
/// consistent perturbation for nonzero boundary values.
[[nodiscard]] inline BoundaryVector boundary_vector_1d(const WeightKernel1D& kernel, const ExteriorData1D& ext,
                                                       const QuadratureConfig& quad = {}) {
    const double shift = kernel.modified ? -kernel.omega_bar[0] : 0.0;
    return boundary_vector_1d(kernel.grid, ext, kernel.s, quad, shift);
}

/// Frame values u_{p,q} on the (N+1)^2 node grid; interior entries are zero.
[[nodiscard]] inline std::vector<double> frame_values(const Grid2D& grid, const ExteriorData2D& ext) {
    const int N = grid.N;
    std::vector<double> values(static_cast<std::size_t>((N + 1) * (N + 1)), 0.0);
    if (!ext.boundary) return values;
    for (int p = 0; p <= N; ++p) {
        for (int q = 0; q <= N; ++q) {
            if (p == 0 || q == 0 || p == N || q == N) {
                values[static_cast<std::size_t>(p * (N + 1) + q)] = ext.boundary(grid.node(p), grid.node(q));
            }
        }
    }
    return values;
}

/// Boundary vector in 2D: exterior integral of g plus the truncated frame-node
/// hats, at all (N+1)^2 nodes; G applies the theta-combined stencil to R.
/// frame: (N+1)^2 node values, of which only the frame is read; empty means
/// "take them from ext.boundary". self_shift is added to each frame node's self weight.
[[nodiscard]] inline BoundaryVector boundary_vector_2d(const Grid2D& grid, const ExteriorData2D& ext, FracOrder s,
                                                       double theta, const QuadratureConfig& quad = {},
                                                       std::vector<double> frame = {}, double self_shift = 0.0) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw std::domain_error("boundary_vector_2d: theta must lie in [0, 1]");
    const int N = grid.N;
    const double h = grid.h();
    const double L = grid.L;
    const double sv = s.value();
    const double c = splitting_constant(2, sv - 1.0);
    if (frame.empty()) frame = frame_values(grid, ext);
    if (frame.size() != static_cast<std::size_t>((N + 1) * (N + 1))) {
        throw ShapeMismatch("frame values must cover the (N+1)^2 node grid");
    }
    const std::size_t row = static_cast<std::size_t>(N + 1);

    BoundaryVector out{std::vector<double>(row * row, 0.0), std::vector<double>(grid.interior_size(), 0.0)};

    struct FrameNode {
        int p, q;
        double value;
    };
    std::vector<FrameNode> active;
    for (int p = 0; p <= N; ++p) {
        for (int q = 0; q <= N; ++q) {
            const bool on_frame = p == 0 || q == 0 || p == N || q == N;
            const double v = frame[static_cast<std::size_t>(p) * row + static_cast<std::size_t>(q)];
            if (on_frame && v != 0.0) active.push_back({p, q, v});
        }
    }
    if (ext.is_zero && active.empty()) return out;

    std::optional<detail::CellMomentTable> cells;
    if (!active.empty()) cells.emplace(N, sv, quad);
    const double hat_scale = std::pow(h, 2.0 - 2.0 * sv);

    // exterior of [-L, L]^2 within the support box, as four rectangles
    struct Rect {
        double x0, x1, y0, y1;
    };
    std::vector<Rect> rects;
    if (!ext.is_zero) {
        const Box2D& b = ext.support;
        if (b.x_lo < -L) rects.push_back({b.x_lo, -L, b.y_lo, b.y_hi});
        if (b.x_hi > L) rects.push_back({L, b.x_hi, b.y_lo, b.y_hi});
        const double xa = std::max(b.x_lo, -L), xb = std::min(b.x_hi, L);
        if (xb > xa) {
            if (b.y_lo < -L) rects.push_back({xa, xb, b.y_lo, -L});
            if (b.y_hi > L) rects.push_back({xa, xb, L, b.y_hi});
        }
    }

    // pieces are also cut at the evaluation point, so it is always an endpoint or outside
    auto split = [](double a, double b, double at, const std::vector<double>& breaks) {
        std::vector<double> cuts = breaks;
        cuts.push_back(at);
        return detail::split_interval(a, b, std::move(cuts));
    };

    parallel_for(0, static_cast<std::ptrdiff_t>(row * row), [&](std::ptrdiff_t flat) {
        const int i = static_cast<int>(flat / static_cast<std::ptrdiff_t>(row));
        const int j = static_cast<int>(flat % static_cast<std::ptrdiff_t>(row));
        const double x0 = grid.node(i), y0 = grid.node(j);
        double value = 0.0;
        for (const auto& node : active) {
            // hat cells (a, b) in node-index units, kept only inside the domain
            double hat = 0.0;
            const int ax[2] = {node.p - 1, node.p};
            const int by[2] = {node.q - 1, node.q};
            for (int u = 0; u < 2; ++u) {
                if (ax[u] < 0 || ax[u] > N - 1) continue;
                for (int v = 0; v < 2; ++v) {
                    if (by[v] < 0 || by[v] > N - 1) continue;
                    // cell left of the node rises towards it (weight index 1)
                    hat += cells->integral(ax[u] - i, by[v] - j, u == 0 ? 1 : 0, v == 0 ? 1 : 0);
                }
            }
            value += node.value * hat_scale * hat;
        }
        for (const Rect& r : rects) {
            for (const auto& [xa, xb] : split(r.x0, r.x1, x0, ext.x_breaks)) {
                value += detail::integrate_with_endpoint_distances(
                    [&](double x, double x_from, double x_to) {
                        const double dx = detail::distance_outside(x0, xa, xb, x_from, x_to);
                        double y_lo = r.y0, y_hi = r.y1;
                        if (ext.y_range) {
                            const auto range = ext.y_range(x);
                            y_lo = std::max(y_lo, range[0]);
                            y_hi = std::min(y_hi, range[1]);
                        }
                        double inner = 0.0;
                        if (!(y_hi > y_lo)) return inner;
                        for (const auto& [ya, yb] : split(y_lo, y_hi, y0, ext.y_breaks)) {
                            inner += detail::integrate_with_endpoint_distances(
                                [&](double y, double y_from, double y_to) {
                                    const double dy = detail::distance_outside(y0, ya, yb, y_from, y_to);
                                    // r^{-2s} is integrable; the floor only stops overflow at nodes next to the corner
                                    return std::pow(std::max(std::hypot(dx, dy), 1e-100), -2.0 * sv) * ext.g(x, y);
                                },
                                ya, yb, quad, false);
                        }
                        return inner;
                    },
                    xa, xb, quad);
            }
        }
        out.R[static_cast<std::size_t>(flat)] = c * value;
    });
    for (const auto& node : active) {
        out.R[static_cast<std::size_t>(node.p) * row + static_cast<std::size_t>(node.q)] += self_shift * node.value;
    }

    auto R = [&](int i, int j) { return out.R[static_cast<std::size_t>(i) * row + static_cast<std::size_t>(j)]; };
    const double h2 = h * h;
    for (int i = 1; i < N; ++i) {
        for (int j = 1; j < N; ++j) {
            const double centre = R(i, j);
            const double five = -(R(i - 1, j) + R(i + 1, j) + R(i, j - 1) + R(i, j + 1) - 4.0 * centre) / h2;
            const double diag =
                -(R(i - 1, j - 1) + R(i + 1, j - 1) + R(i - 1, j + 1) + R(i + 1, j + 1) - 4.0 * centre) / (2.0 * h2);
            out.G[grid.interior_index(i, j)] = theta * five + (1.0 - theta) * diag;
        }
    }
    return out;
}

/// Boundary vector matching a kernel's theta and c00 shift of omega_bar_{0,0}.
[[nodiscard]] inline BoundaryVector boundary_vector_2d(const WeightKernel2D& kernel, const ExteriorData2D& ext,
                                                       const QuadratureConfig& quad = {},
                                                       std::vector<double> frame = {}) {
    const double sv = kernel.s.value();
    const double shift = kernel.c00 * splitting_constant(2, sv - 1.0) * std::pow(kernel.h(), 2.0 - 2.0 * sv);
    return boundary_vector_2d(kernel.grid, ext, kernel.s, kernel.theta, quad, std::move(frame), shift);
}

}  // namespace fraclap
