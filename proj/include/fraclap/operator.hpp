#pragma once

// Toeplitz (1D) and block-Toeplitz-Toeplitz-block (2D) applications of the
// discrete fractional Laplacian through circulant embedding and FFTW.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraclap/errors.hpp"
#include "fraclap/kernel_weights.hpp"

namespace fraclap {

namespace detail {

// The FFTW planner is not thread safe; execution on fresh buffers is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwPlanDeleter {
    void operator()(fftw_plan_s* plan) const {
        std::scoped_lock lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
};
using FftwPlan = std::shared_ptr<fftw_plan_s>;

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

inline RealBuffer alloc_real(std::size_t n) {
    return RealBuffer(fftw_alloc_real(n));
}
inline ComplexBuffer alloc_complex(std::size_t n) {
    return ComplexBuffer(fftw_alloc_complex(n));
}

inline std::size_t next_power_of_two(std::size_t n) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

/// Real-to-complex / complex-to-real plan pair for an n-dimensional real array.
/// FFTW_ESTIMATE keeps the plans, and therefore every output bit, reproducible.
struct RealFftPlans {
    std::vector<int> dims;
    std::size_t real_size = 1;
    std::size_t complex_size = 1;
    FftwPlan forward;
    FftwPlan backward;

    explicit RealFftPlans(std::vector<int> extents) : dims(std::move(extents)) {
        for (std::size_t d = 0; d < dims.size(); ++d) {
            real_size *= static_cast<std::size_t>(dims[d]);
            complex_size *= d + 1 == dims.size() ? static_cast<std::size_t>(dims[d] / 2 + 1)
                                                 : static_cast<std::size_t>(dims[d]);
        }
        auto in = alloc_real(real_size);
        auto out = alloc_complex(complex_size);
        std::scoped_lock lock(fftw_planner_mutex());
        const int rank = static_cast<int>(dims.size());
        forward = FftwPlan(fftw_plan_dft_r2c(rank, dims.data(), in.get(), out.get(), FFTW_ESTIMATE),
                           FftwPlanDeleter{});
        backward = FftwPlan(fftw_plan_dft_c2r(rank, dims.data(), out.get(), in.get(), FFTW_ESTIMATE),
                            FftwPlanDeleter{});
        if (!forward || !backward) throw std::runtime_error("FFTW plan creation failed");
    }
};

}  // namespace detail

/// Symmetric Toeplitz matrix B_1 with entries w_{|i-j|}, applied in O(N log N).
class ToeplitzOperator1D {
public:
    explicit ToeplitzOperator1D(std::vector<double> first_column)
        : column_(std::move(first_column)),
          embed_(detail::next_power_of_two(2 * column_.size())),
          plans_(std::make_shared<detail::RealFftPlans>(std::vector<int>{static_cast<int>(embed_)})) {
        if (column_.empty()) throw std::invalid_argument("Toeplitz operator needs at least one entry");
        auto c = detail::alloc_real(embed_);
        std::fill_n(c.get(), embed_, 0.0);
        const std::size_t n = column_.size();
        for (std::size_t k = 0; k < n; ++k) c[k] = column_[k];
        for (std::size_t k = 1; k < n; ++k) c[embed_ - k] = column_[k];
        auto spectrum = detail::alloc_complex(plans_->complex_size);
        fftw_execute_dft_r2c(plans_->forward.get(), c.get(), spectrum.get());
        symbol_.resize(plans_->complex_size);
        // the embedding is real and even, so its spectrum is real
        for (std::size_t k = 0; k < symbol_.size(); ++k) symbol_[k] = spectrum[k][0] / static_cast<double>(embed_);
    }

    explicit ToeplitzOperator1D(const WeightKernel1D& kernel) : ToeplitzOperator1D(kernel.w) {}

    [[nodiscard]] std::size_t size() const noexcept { return column_.size(); }
    [[nodiscard]] std::size_t embedding_size() const noexcept { return embed_; }
    [[nodiscard]] std::span<const double> first_column() const noexcept { return column_; }

    [[nodiscard]] std::vector<double> apply(std::span<const double> u) const {
        const std::size_t n = size();
        if (u.size() != n) throw ShapeMismatch("Toeplitz apply: expected length " + std::to_string(n));
        auto x = detail::alloc_real(embed_);
        std::fill_n(x.get(), embed_, 0.0);
        std::copy(u.begin(), u.end(), x.get());
        auto spectrum = detail::alloc_complex(plans_->complex_size);
        fftw_execute_dft_r2c(plans_->forward.get(), x.get(), spectrum.get());
        for (std::size_t k = 0; k < symbol_.size(); ++k) {
            spectrum[k][0] *= symbol_[k];
            spectrum[k][1] *= symbol_[k];
        }
        fftw_execute_dft_c2r(plans_->backward.get(), spectrum.get(), x.get());
        return std::vector<double>(x.get(), x.get() + n);
    }

    /// O(N^2) reference product.
    [[nodiscard]] std::vector<double> apply_dense(std::span<const double> u) const {
        const std::size_t n = size();
        if (u.size() != n) throw ShapeMismatch("Toeplitz apply: expected length " + std::to_string(n));
        std::vector<double> v(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += column_[i > j ? i - j : j - i] * u[j];
            v[i] = acc;
        }
        return v;
    }

    /// Row-major dense matrix.
    [[nodiscard]] std::vector<double> dense_matrix() const {
        const std::size_t n = size();
        std::vector<double> a(n * n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) a[i * n + j] = column_[i > j ? i - j : j - i];
        }
        return a;
    }

private:
    std::vector<double> column_;
    std::size_t embed_;
    std::shared_ptr<detail::RealFftPlans> plans_;
    std::vector<double> symbol_;
};

/// BTTB matrix B_2 with entries w(|p-i|, |q-j|) over the (N-1)^2 interior
/// nodes, applied by a doubly circulant embedding in O(N^2 log N).
class BTTBOperator2D {
public:
    /// stencil: quadrant values w(p, q), 0 <= p, q < side, row-major in p.
    BTTBOperator2D(std::vector<double> stencil, std::size_t side)
        : stencil_(std::move(stencil)),
          side_(side),
          embed_(detail::next_power_of_two(2 * side)),
          plans_(std::make_shared<detail::RealFftPlans>(
              std::vector<int>{static_cast<int>(embed_), static_cast<int>(embed_)})) {
        if (stencil_.size() != side * side) throw ShapeMismatch("BTTB stencil must be side x side");
        auto c = detail::alloc_real(embed_ * embed_);
        std::fill_n(c.get(), embed_ * embed_, 0.0);
        for (std::size_t p = 0; p < side; ++p) {
            for (std::size_t q = 0; q < side; ++q) {
                const double v = stencil_[p * side + q];
                const std::size_t rows[2] = {p, (embed_ - p) % embed_};
                const std::size_t cols[2] = {q, (embed_ - q) % embed_};
                for (std::size_t r : rows) {
                    for (std::size_t col : cols) c[r * embed_ + col] = v;
                }
            }
        }
        auto spectrum = detail::alloc_complex(plans_->complex_size);
        fftw_execute_dft_r2c(plans_->forward.get(), c.get(), spectrum.get());
        symbol_.resize(plans_->complex_size);
        const double norm = static_cast<double>(embed_ * embed_);
        for (std::size_t k = 0; k < symbol_.size(); ++k) symbol_[k] = spectrum[k][0] / norm;
    }

    explicit BTTBOperator2D(const WeightKernel2D& kernel) : BTTBOperator2D(kernel.w, kernel.side()) {}

    [[nodiscard]] std::size_t side() const noexcept { return side_; }
    [[nodiscard]] std::size_t size() const noexcept { return side_ * side_; }
    [[nodiscard]] double stencil(long p, long q) const {
        return stencil_[static_cast<std::size_t>(std::abs(p)) * side_ + static_cast<std::size_t>(std::abs(q))];
    }

    [[nodiscard]] std::vector<double> apply(std::span<const double> u) const {
        if (u.size() != size()) throw ShapeMismatch("BTTB apply: expected length " + std::to_string(size()));
        const std::size_t m = embed_;
        auto x = detail::alloc_real(m * m);
        std::fill_n(x.get(), m * m, 0.0);
        for (std::size_t i = 0; i < side_; ++i) {
            std::copy_n(u.data() + i * side_, side_, x.get() + i * m);
        }
        auto spectrum = detail::alloc_complex(plans_->complex_size);
        fftw_execute_dft_r2c(plans_->forward.get(), x.get(), spectrum.get());
        for (std::size_t k = 0; k < symbol_.size(); ++k) {
            spectrum[k][0] *= symbol_[k];
            spectrum[k][1] *= symbol_[k];
        }
        fftw_execute_dft_c2r(plans_->backward.get(), spectrum.get(), x.get());
        std::vector<double> v(size());
        for (std::size_t i = 0; i < side_; ++i) {
            std::copy_n(x.get() + i * m, side_, v.data() + i * side_);
        }
        return v;
    }

    /// O(N^4) reference product.
    [[nodiscard]] std::vector<double> apply_dense(std::span<const double> u) const {
        if (u.size() != size()) throw ShapeMismatch("BTTB apply: expected length " + std::to_string(size()));
        const long n = static_cast<long>(side_);
        std::vector<double> v(size(), 0.0);
        for (long i = 0; i < n; ++i) {
            for (long j = 0; j < n; ++j) {
                double acc = 0.0;
                for (long p = 0; p < n; ++p) {
                    for (long q = 0; q < n; ++q) acc += stencil(i - p, j - q) * u[static_cast<std::size_t>(p * n + q)];
                }
                v[static_cast<std::size_t>(i * n + j)] = acc;
            }
        }
        return v;
    }

    [[nodiscard]] std::vector<double> dense_matrix() const {
        const long n = static_cast<long>(side_);
        const std::size_t dim = size();
        std::vector<double> a(dim * dim);
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < n; ++j)
                for (long p = 0; p < n; ++p)
                    for (long q = 0; q < n; ++q)
                        a[static_cast<std::size_t>(i * n + j) * dim + static_cast<std::size_t>(p * n + q)] =
                            stencil(i - p, j - q);
        return a;
    }

private:
    std::vector<double> stencil_;
    std::size_t side_;
    std::size_t embed_;
    std::shared_ptr<detail::RealFftPlans> plans_;
    std::vector<double> symbol_;
};

enum class Norm { inf, l2 };

/// Full discrete operator: structured product plus the exterior contribution G.
template <class Operator>
[[nodiscard]] std::vector<double> discrete_frac_laplacian(const Operator& op, std::span<const double> boundary_g,
                                                          std::span<const double> u) {
    if (boundary_g.size() != op.size()) throw ShapeMismatch("boundary vector length does not match operator");
    std::vector<double> v = op.apply(u);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += boundary_g[i];
    return v;
}

/// Discrete norm of a - b; the l2 norm carries the h^{dim/2} cell measure.
[[nodiscard]] inline double error_norm(std::span<const double> a, std::span<const double> b, Norm norm, double h,
                                       int dim) {
    if (a.size() != b.size()) throw ShapeMismatch("error_norm: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(a[i] - b[i]);
        if (norm == Norm::inf) {
            acc = std::max(acc, d);
        } else {
            acc += d * d;
        }
    }
    return norm == Norm::inf ? acc : std::sqrt(acc * std::pow(h, dim));
}

/// Norm of (discrete operator applied to u) - f_reference.
template <class Operator>
[[nodiscard]] double truncation_error(const Operator& op, std::span<const double> boundary_g,
                                      std::span<const double> u, std::span<const double> f_reference, Norm norm,
                                      double h, int dim) {
    const auto v = discrete_frac_laplacian(op, boundary_g, u);
    return error_norm(v, f_reference, norm, h, dim);
}

}  // namespace fraclap
