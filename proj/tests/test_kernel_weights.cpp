#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fraclap/kernel_weights.hpp"
#include "oracles.hpp"

using namespace fraclap;

namespace {

const double s_grid[] = {0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9};

/// Brute-force min row sum of a dense matrix.
double min_row_sum(const Eigen::MatrixXd& A) { return A.rowwise().sum().minCoeff(); }

}  // namespace

TEST(FracOrder, AcceptsTheOpenIntervalExceptOneHalf) {
    EXPECT_NO_THROW(FracOrder(0.001));
    EXPECT_NO_THROW(FracOrder(0.999));
    EXPECT_THROW(FracOrder(0.5), std::domain_error);
    EXPECT_THROW(FracOrder(0.0), std::domain_error);
    EXPECT_THROW(FracOrder(1.0), std::domain_error);
    EXPECT_THROW(FracOrder(std::numeric_limits<double>::quiet_NaN()), std::domain_error);
}

TEST(SplittingConstant, MatchesExtendedPrecisionGamma) {
    for (int n : {1, 2}) {
        for (double sp : {-0.9, -0.7, -0.45, -0.2, 0.2, 0.5, 0.8}) {
            const double ref = oracle::splitting_constant(n, sp);
            EXPECT_NEAR(splitting_constant(n, sp), ref, 1e-13 * std::abs(ref)) << "n=" << n << " s'=" << sp;
        }
    }
}

TEST(SplittingConstant, RejectsSingularArguments) {
    EXPECT_THROW((void)splitting_constant(1, 0.0), std::domain_error);
    EXPECT_THROW((void)splitting_constant(1, 1.0), std::domain_error);
    EXPECT_THROW((void)splitting_constant(1, -0.5), std::domain_error);  // Gamma(0)
    EXPECT_THROW((void)splitting_constant(3, 0.3), std::domain_error);
}

TEST(OmegaBar1D, MatchesAdaptiveQuadratureOfTheDefinition) {
    for (double s : s_grid) {
        for (double h : {1.0 / 64, 0.1}) {
            for (long k = 0; k <= 20; ++k) {
                const double ref = oracle::omega_bar_1d(k, h, s);
                EXPECT_NEAR(omega_bar_1d(k, h, FracOrder(s)), ref, 1e-11 * std::abs(ref)) << "s=" << s << " k=" << k;
            }
        }
    }
}

TEST(OmegaBar1D, SeriesBranchAgreesFarFromTheOrigin) {
    // k well beyond the series threshold, where direct differencing would cancel
    for (double s : {0.2, 0.8}) {
        for (long k : {40L, 300L}) {
            const double ref = oracle::omega_bar_1d(k, 1.0, s);
            EXPECT_NEAR(omega_bar_1d(k, 1.0, FracOrder(s)), ref, 1e-10 * std::abs(ref));
        }
    }
}

TEST(Weights1D, PlainWeightsAreTheDiscreteLaplacianOfOmegaBar) {
    for (double s : s_grid) {
        const Grid1D grid(1.0, 64);
        const double h = grid.h();
        const auto kernel = weights_1d(grid, FracOrder(s), Correction::none);
        EXPECT_FALSE(kernel.modified);
        auto om = [&](long k) { return oracle::omega_bar_1d(std::abs(k), h, s); };
        for (long k = 0; k <= 20; ++k) {
            const double ref = -(om(k - 1) - 2.0 * om(k) + om(k + 1)) / (h * h);
            EXPECT_NEAR(kernel.w[k], ref, 1e-9 * std::abs(kernel.w[0])) << "s=" << s << " k=" << k;
        }
    }
}

TEST(Weights1D, CorrectionZeroesTheCentralMomentOnlyWhenNeeded) {
    for (double s : s_grid) {
        const Grid1D grid(1.0, 32);
        const auto plain = weights_1d(grid, FracOrder(s), Correction::none);
        const auto fixed = weights_1d(grid, FracOrder(s));
        EXPECT_EQ(fixed.modified, plain.w[1] >= 0.0) << "s=" << s;
        if (fixed.modified) {
            const double h2 = grid.h() * grid.h();
            EXPECT_NEAR(fixed.w[0], -2.0 * plain.omega_bar[1] / h2, 1e-12 * std::abs(fixed.w[0]));
            EXPECT_NEAR(fixed.w[1], (2.0 * plain.omega_bar[1] - plain.omega_bar[2]) / h2, 1e-12 * std::abs(fixed.w[0]));
            EXPECT_EQ(fixed.omega_bar_effective(0), 0.0);
            for (std::size_t k = 2; k < plain.w.size(); ++k) EXPECT_EQ(fixed.w[k], plain.w[k]);
        } else {
            EXPECT_EQ(fixed.w, plain.w);
        }
    }
}

TEST(Weights1D, ConditionsHoldAfterCorrection) {
    for (double s : s_grid) {
        for (int N : {16, 64, 256}) {
            const auto kernel = weights_1d(Grid1D(1.0, N), FracOrder(s));
            const auto report = verify_conditions_1d(kernel);
            EXPECT_TRUE(report.feasible()) << "s=" << s << " N=" << N;
            EXPECT_TRUE(report.offending_indices.empty());
        }
    }
}

TEST(Weights1D, RowSumMinimumMatchesBruteForce) {
    for (double s : {0.2, 0.7}) {
        const auto kernel = weights_1d(Grid1D(1.0, 40), FracOrder(s));
        const double brute = min_row_sum(oracle::toeplitz(kernel.w));
        EXPECT_NEAR(verify_conditions_1d(kernel).row_sum_min, brute, 1e-10 * std::abs(kernel.w[0]));
    }
}

TEST(Weights1D, FullStencilSumTelescopes) {
    for (double s : s_grid) {
        const Grid1D grid(1.0, 64);
        const auto kernel = weights_1d(grid, FracOrder(s), Correction::none);
        const double h2 = grid.h() * grid.h();
        const int N = grid.N;
        const double ref = 2.0 * (kernel.omega_bar[N - 1] - kernel.omega_bar[N]) / h2;
        EXPECT_NEAR(kernel.full_stencil_sum(), ref, 1e-10 * std::abs(kernel.w[0]));
    }
}

TEST(Weights1D, SignViolationsAreReported) {
    auto kernel = weights_1d(Grid1D(1.0, 16), FracOrder(0.3));
    kernel.w[3] = 0.5;
    const auto report = verify_conditions_1d(kernel);
    EXPECT_FALSE(report.sign_ok);
    ASSERT_EQ(report.offending_indices.size(), 1u);
    EXPECT_EQ(report.offending_indices[0][0], 3);
}

TEST(OmegaBar2D, MatchesNestedQuadratureOfTheDefinition) {
    const long samples[][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 0}, {2, 1}, {3, 3}, {7, 2}, {0, 9}, {12, 5}};
    for (double s : {0.15, 0.45, 0.55, 0.85}) {
        for (const auto& pq : samples) {
            const double ref = oracle::omega_bar_2d(pq[0], pq[1], 1.0 / 16, s);
            EXPECT_NEAR(omega_bar_2d(pq[0], pq[1], 1.0 / 16, FracOrder(s)), ref, 1e-10 * std::abs(ref))
                << "s=" << s << " p=" << pq[0] << " q=" << pq[1];
        }
    }
}

TEST(OmegaBar2D, TableMatchesSingleEvaluationsAndIsSymmetric) {
    const Grid2D grid(1.0, 10);
    const FracOrder s(0.35);
    const auto table = omega_table_2d(grid, s);
    for (long p = 0; p <= 10; p += 3) {
        for (long q = 0; q <= 10; q += 2) {
            EXPECT_NEAR(table(p, q), omega_bar_2d(p, q, grid.h(), s), 1e-13 * std::abs(table(p, q)));
            EXPECT_NEAR(table(p, q), table(q, p), 1e-14 * std::abs(table(p, q)));
            EXPECT_EQ(table(-p, q), table(p, q));
        }
    }
}

TEST(Weights2D, ComposeTheBlendedLaplacianOfOmegaBar) {
    const Grid2D grid(1.0, 8);
    const double s = 0.3, theta = 0.4, c00 = 2.0;
    const double h = grid.h(), h2 = h * h;
    const double scale = oracle::splitting_constant(2, s - 1.0) * std::pow(h, 2.0 - 2.0 * s);
    std::vector<double> cache(8 * 8);
    for (long p = 0; p < 8; ++p)
        for (long q = 0; q <= p; ++q) cache[p * 8 + q] = cache[q * 8 + p] = oracle::omega_bar_2d(p, q, h, s);
    auto om = [&](long p, long q) {
        return cache[std::abs(p) * 8 + std::abs(q)] + ((p == 0 && q == 0) ? c00 * scale : 0.0);
    };
    const auto kernel = weights_2d(grid, FracOrder(s), theta, c00);
    for (long p = 0; p <= 6; ++p) {
        for (long q = 0; q <= 6; ++q) {
            const double five = -(om(p - 1, q) + om(p + 1, q) + om(p, q - 1) + om(p, q + 1) - 4 * om(p, q)) / h2;
            const double diag =
                -(om(p - 1, q - 1) + om(p + 1, q - 1) + om(p - 1, q + 1) + om(p + 1, q + 1) - 4 * om(p, q)) / (2 * h2);
            EXPECT_NEAR(kernel(p, q), theta * five + (1 - theta) * diag, 1e-8 * std::abs(kernel(0, 0)))
                << "p=" << p << " q=" << q;
        }
    }
}

TEST(Weights2D, CentralShiftOnlyMovesTheNearStencil) {
    const Grid2D grid(1.0, 12);
    const FracOrder s(0.6);
    const auto table = omega_table_2d(grid, s);
    const double theta = 0.7, c00 = 3.0;
    const auto base = weights_2d(table, theta, 0.0);
    const auto shifted = weights_2d(table, theta, c00);
    const double d = c00 * table.scale / (grid.h() * grid.h());
    EXPECT_NEAR(shifted(0, 0) - base(0, 0), d * (4 * theta + 2 * (1 - theta)), 1e-9 * std::abs(base(0, 0)));
    EXPECT_NEAR(shifted(1, 0) - base(1, 0), -d * theta, 1e-9 * std::abs(base(0, 0)));
    EXPECT_NEAR(shifted(1, 1) - base(1, 1), -d * (1 - theta) / 2, 1e-9 * std::abs(base(0, 0)));
    EXPECT_EQ(shifted(2, 0), base(2, 0));
    EXPECT_EQ(shifted(5, 4), base(5, 4));
}

TEST(Weights2D, RejectsInvalidBlendAndShift) {
    const Grid2D grid(1.0, 8);
    EXPECT_THROW((void)weights_2d(grid, FracOrder(0.3), 1.2, 0.0), std::domain_error);
    EXPECT_THROW((void)weights_2d(grid, FracOrder(0.3), -0.1, 0.0), std::domain_error);
    EXPECT_THROW((void)weights_2d(grid, FracOrder(0.3), 0.5, -1.0), std::domain_error);
}

TEST(Weights2D, ConditionReportMatchesBruteForce) {
    for (double s : {0.25, 0.8}) {
        for (double theta : {0.0, 0.5, 1.0}) {
            const Grid2D grid(1.0, 12);
            const auto kernel = weights_2d(grid, FracOrder(s), theta, 1.0);
            const auto report = verify_conditions_2d(kernel);
            const long m = static_cast<long>(kernel.side());
            const Eigen::MatrixXd A = oracle::bttb(kernel.w, m);
            EXPECT_NEAR(report.row_sum_min, min_row_sum(A), 1e-10 * std::abs(kernel(0, 0)));
            std::size_t bad = 0;
            for (long p = 0; p < m; ++p)
                for (long q = 0; q < m; ++q) bad += ((p == 0 && q == 0) ? !(kernel(p, q) > 0) : !(kernel(p, q) < 0));
            EXPECT_EQ(report.offending_indices.size(), bad);
            EXPECT_EQ(report.sign_ok, bad == 0);
            EXPECT_EQ(report.feasible(), bad == 0 && min_row_sum(A) > 0);
        }
    }
}

TEST(Weights2D, LargerCentralShiftNeverShrinksFeasibility) {
    const Grid2D grid(1.0, 16);
    for (double s : {0.3, 0.7}) {
        const auto table = omega_table_2d(grid, FracOrder(s));
        for (double theta = 0.0; theta <= 1.0; theta += 0.1) {
            const bool low = verify_conditions_2d(weights_2d(table, theta, 1.0)).feasible();
            const bool high = verify_conditions_2d(weights_2d(table, theta, 16.0)).feasible();
            EXPECT_TRUE(!low || high) << "s=" << s << " theta=" << theta;
        }
    }
}
