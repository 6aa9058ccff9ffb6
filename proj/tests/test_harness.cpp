#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fraclap/harness.hpp"

using namespace fraclap;

TEST(RefinementList, MustBeNonEmptyAndDoubling) {
    const StudyCase c{1, 0.3, 1.0, 1.0, 0.0, 1.0, 1.0};
    EXPECT_THROW((void)run_truncation_study(c, std::vector<int>{}), std::invalid_argument);
    EXPECT_THROW((void)run_truncation_study(c, std::vector<int>{16, 48}), std::invalid_argument);
    EXPECT_THROW((void)run_convergence_study(c, std::vector<int>{16, 24}), std::invalid_argument);
}

TEST(RefinementList, RejectsUnknownDimension) {
    const StudyCase c{3, 0.3, 1.0, 1.0, 0.0, 1.0, 1.0};
    EXPECT_THROW((void)run_truncation_study(c, std::vector<int>{16}), std::invalid_argument);
    EXPECT_THROW((void)run_convergence_study(c, std::vector<int>{16}), std::invalid_argument);
}

TEST(TruncationStudy, RatesAreLogRatiosOfConsecutiveErrors) {
    const StudyCase c{1, 0.4, 1.6, 1.0, 0.0, 1.0, 1.0};
    const std::vector<int> Ns{32, 64, 128};
    const auto table = run_truncation_study(c, Ns);
    ASSERT_EQ(table.rows.size(), 3u);
    EXPECT_FALSE(table.rows[0].rate.has_value());
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(table.rows[k].N, Ns[k]);
        EXPECT_DOUBLE_EQ(table.rows[k].h, 2.0 / Ns[k]);
        EXPECT_GT(table.rows[k].error, 0.0);
    }
    for (std::size_t k = 1; k < 3; ++k) {
        ASSERT_TRUE(table.rows[k].rate.has_value());
        EXPECT_DOUBLE_EQ(*table.rows[k].rate, std::log2(table.rows[k - 1].error / table.rows[k].error));
    }
}

TEST(TruncationStudy, SingleResolutionHasNoRate) {
    const StudyCase c{1, 0.7, 1.3, 1.0, 0.0, 1.0, 1.0};
    const auto table = run_truncation_study(c, std::vector<int>{64});
    ASSERT_EQ(table.rows.size(), 1u);
    EXPECT_FALSE(table.rows[0].rate.has_value());
    EXPECT_EQ(table.experiment, "truncation-1d");
}

TEST(TruncationStudy, StrongOrderCaseMatchesKnownErrors) {
    // s = 0.8 with P = 2 - s: max-norm truncation errors 6.368e-2 and 4.724e-2
    const StudyCase c{1, 0.8, 1.2, 1.0, 0.0, 1.0, 1.0};
    const auto table = run_truncation_study(c, std::vector<int>{128, 256});
    EXPECT_NEAR(table.rows[0].error, 6.368e-2, 0.02 * 6.368e-2);
    EXPECT_NEAR(table.rows[1].error, 4.724e-2, 0.02 * 4.724e-2);
}

TEST(TruncationStudy, EuclideanNormIsBoundedByTheMaximumNorm) {
    const StudyCase c{1, 0.3, 1.0, 1.0, 0.0, 1.0, 1.0};
    StudyOptions l2;
    l2.norm = Norm::l2;
    const std::vector<int> Ns{64, 128};
    const auto inf_table = run_truncation_study(c, Ns);
    const auto l2_table = run_truncation_study(c, Ns, l2);
    for (std::size_t k = 0; k < Ns.size(); ++k) {
        EXPECT_LE(l2_table.rows[k].error, std::sqrt(2.0) * inf_table.rows[k].error);
        EXPECT_GT(l2_table.rows[k].error, 0.0);
    }
}

TEST(TruncationStudy, TwoDimensionalDifferencesShrinkUnderRefinement) {
    const StudyCase c{2, 0.3, 0.0, 0.5, 1.0, 1.0, 1.0};
    const auto table = run_truncation_study(c, std::vector<int>{8, 16, 32});
    EXPECT_EQ(table.experiment, "truncation-2d");
    for (std::size_t k = 1; k < table.rows.size(); ++k) {
        EXPECT_LT(table.rows[k].error, table.rows[k - 1].error);
        EXPECT_GT(*table.rows[k].rate, 0.5);
    }
}

TEST(ConvergenceStudy, InhomogeneousExteriorConvergesAtSecondOrder) {
    // s = 0.6, P = 0, L = 0.5 inside a unit-radius profile: 6.647e-6 at N = 128
    const StudyCase c{1, 0.6, 0.0, 1.0, 0.0, 0.5, 1.0};
    const auto table = run_convergence_study(c, std::vector<int>{128, 256});
    EXPECT_NEAR(table.rows[0].error, 6.647e-6, 0.05 * 6.647e-6);
    EXPECT_NEAR(*table.rows[1].rate, 1.9434, 0.05);
    EXPECT_GT(table.rows[0].iterations, 0);
}

TEST(ConvergenceStudy, TwoDimensionalErrorsFallAndRecordTheReference) {
    const StudyCase c{2, 0.4, 0.0, 1.0, 0.0, 1.0, 1.0};
    StudyOptions options;
    options.reference_N = 64;
    const auto table = run_convergence_study(c, std::vector<int>{8, 16}, options);
    EXPECT_EQ(table.reference_N, 64);
    EXPECT_LT(table.rows[1].error, table.rows[0].error);
    EXPECT_GT(*table.rows[1].rate, 1.0);

    options.reference_N = 40;
    EXPECT_THROW((void)run_convergence_study(c, std::vector<int>{8, 16}, options), std::invalid_argument);
}

TEST(ConvergenceStudy, DefaultReferenceIsFourTimesTheFinest) {
    const StudyCase c{2, 0.8, 0.0, 1.0, 0.0, 1.0, 1.0};
    const auto table = run_convergence_study(c, std::vector<int>{8});
    EXPECT_EQ(table.reference_N, 32);
}

TEST(UniformGrid, IncludesEndpointsAndSkipsOneHalf) {
    const auto g = uniform_grid(0.1, 0.9, 0.1, true);
    ASSERT_EQ(g.size(), 8u);
    EXPECT_NEAR(g.front(), 0.1, 1e-15);
    EXPECT_NEAR(g.back(), 0.9, 1e-12);
    for (double v : g) EXPECT_GT(std::abs(v - 0.5), 1e-6);
    EXPECT_EQ(uniform_grid(0.0, 1.0, 0.25).size(), 5u);
    EXPECT_THROW((void)uniform_grid(0.0, 1.0, 0.0), std::invalid_argument);
    EXPECT_THROW((void)uniform_grid(1.0, 0.0, 0.1), std::invalid_argument);
}

TEST(FeasibilityScan, AgreesWithDirectChecks) {
    const std::vector<double> s_grid{0.2, 0.45, 0.8};
    const auto theta_grid = uniform_grid(0.0, 1.0, 0.25);
    const auto map = theta_feasibility_scan(s_grid, theta_grid, 3.0, 16);
    ASSERT_EQ(map.feasible.size(), s_grid.size() * theta_grid.size());
    for (std::size_t is = 0; is < s_grid.size(); ++is) {
        std::vector<double> expected;
        for (std::size_t it = 0; it < theta_grid.size(); ++it) {
            const bool direct =
                verify_conditions_2d(weights_2d(Grid2D(1.0, 16), FracOrder(s_grid[is]), theta_grid[it], 3.0)).feasible();
            EXPECT_EQ(map.at(is, it), direct) << "s=" << s_grid[is] << " theta=" << theta_grid[it];
            if (direct) expected.push_back(theta_grid[it]);
        }
        EXPECT_EQ(map.feasible_thetas(is), expected);
    }
}

TEST(FeasibilityScan, RejectsCoarseProbe) {
    EXPECT_THROW((void)theta_feasibility_scan({0.3}, {0.5}, 1.0, 8), std::invalid_argument);
}

TEST(ExitTimeStudy, RequiresEvenResolution) {
    EXPECT_THROW((void)run_exit_time_study({0.4}, {1.0}, 15, 100.0, 0.5), std::invalid_argument);
}

TEST(ExitTimeStudy, ResultsAreOrderedAndPhysical) {
    const auto results = run_exit_time_study({0.6, 0.3}, {2.0, 0.0}, 24, 100.0, 0.5);
    ASSERT_EQ(results.size(), 4u);
    const double order[4][2] = {{0.3, 0.0}, {0.3, 2.0}, {0.6, 0.0}, {0.6, 2.0}};
    for (std::size_t k = 0; k < 4; ++k) {
        const auto& r = results[k];
        EXPECT_EQ(r.s, order[k][0]);
        EXPECT_EQ(r.kappa, order[k][1]);
        EXPECT_EQ(r.N, 24);
        EXPECT_EQ(r.U.size(), 23u * 23u);
        for (double v : r.U) EXPECT_GT(v, 0.0);
        EXPECT_LE(r.center_value, r.max_value);
        EXPECT_GT(r.boundary_layer, 0.0);
        EXPECT_LT(r.boundary_layer, 1.0);
        EXPECT_TRUE(r.conditions_hold);
        EXPECT_GT(r.dominance_margin, 0.0);
        EXPECT_LT(r.residual, 1e-10);
    }
    // the drift term enters as +grad P . grad u, which raises u as kappa grows
    EXPECT_GT(results[1].max_value, results[0].max_value);
}
