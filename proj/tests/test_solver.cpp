#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fraclap/analytic.hpp"
#include "fraclap/solver.hpp"
#include "oracles.hpp"

using namespace fraclap;

namespace {

Eigen::MatrixXd drift_oracle(const WeightKernel2D& kernel, double kappa) {
    return oracle::bttb(kernel.w, static_cast<long>(kernel.side())) + oracle::drift(kernel.N(), kappa);
}

}  // namespace

TEST(ConjugateGradient, MatchesDenseSolve1D) {
    std::mt19937_64 rng(1);
    for (double s : {0.2, 0.8}) {
        const auto kernel = weights_1d(Grid1D(1.0, 64), FracOrder(s));
        const ToeplitzOperator1D op(kernel);
        const auto b = oracle::random_vector(op.size(), rng);
        const Eigen::VectorXd ref = oracle::toeplitz(kernel.w).ldlt().solve(oracle::to_eigen(b));
        const auto report = conjugate_gradient(op, b, {1e-13, 0, {}});
        ASSERT_TRUE(report.converged);
        EXPECT_EQ(report.method, SolveMethod::cg);
        EXPECT_LE(report.residual, 1e-12);
        EXPECT_LT(oracle::max_abs_diff(report.U, ref), 1e-9 * ref.cwiseAbs().maxCoeff());
    }
}

TEST(ConjugateGradient, MatchesDenseSolve2D) {
    std::mt19937_64 rng(2);
    const auto kernel = weights_2d(Grid2D(1.0, 16), FracOrder(0.35), 0.5, 1.0);
    const BTTBOperator2D op(kernel);
    const auto b = oracle::random_vector(op.size(), rng);
    const Eigen::VectorXd ref =
        oracle::bttb(kernel.w, static_cast<long>(kernel.side())).ldlt().solve(oracle::to_eigen(b));
    const auto report = conjugate_gradient(op, b, {1e-13, 0, {}});
    ASSERT_TRUE(report.converged);
    EXPECT_LT(oracle::max_abs_diff(report.U, ref), 1e-9 * ref.cwiseAbs().maxCoeff());
}

TEST(ConjugateGradient, ZeroRightHandSideGivesZero) {
    const auto kernel = weights_1d(Grid1D(1.0, 16), FracOrder(0.3));
    const auto report = conjugate_gradient(ToeplitzOperator1D(kernel), std::vector<double>(15, 0.0));
    EXPECT_TRUE(report.converged);
    EXPECT_EQ(report.iterations, 0);
    for (double v : report.U) EXPECT_EQ(v, 0.0);
}

TEST(ConjugateGradient, ReportsNonConvergenceAndJournalsEachIteration) {
    std::mt19937_64 rng(4);
    const auto kernel = weights_1d(Grid1D(1.0, 128), FracOrder(0.7));
    const ToeplitzOperator1D op(kernel);
    const auto b = oracle::random_vector(op.size(), rng);
    std::vector<double> journal;
    SolverOptions options{1e-14, 3, [&](int it, double r) {
                              EXPECT_EQ(it, static_cast<int>(journal.size()) + 1);
                              journal.push_back(r);
                          }};
    const auto report = conjugate_gradient(op, b, options);
    EXPECT_FALSE(report.converged);
    EXPECT_EQ(report.iterations, 3);
    ASSERT_EQ(journal.size(), 3u);
    EXPECT_EQ(journal.back(), report.residual);
}

TEST(ConjugateGradient, RejectsMismatchedRightHandSide) {
    const auto kernel = weights_1d(Grid1D(1.0, 16), FracOrder(0.3));
    EXPECT_THROW((void)conjugate_gradient(ToeplitzOperator1D(kernel), std::vector<double>(14, 1.0)), ShapeMismatch);
}

TEST(DirichletSolve, RecoversAManufacturedDiscreteSolution) {
    std::mt19937_64 rng(8);
    const auto kernel = weights_1d(Grid1D(1.0, 48), FracOrder(0.4));
    const auto ext = dyda_exterior_1d(1.0, FracOrder(0.4), 1.5, 1.0);
    auto system = make_system_1d(kernel, ext, [](double) { return 0.0; });
    const auto U = oracle::random_vector(system.size(), rng);
    const Eigen::VectorXd BU = oracle::toeplitz(kernel.w) * oracle::to_eigen(U);
    for (std::size_t i = 0; i < U.size(); ++i) system.F[i] = BU(static_cast<Eigen::Index>(i)) + system.G[i];
    const auto report = solve_dirichlet(system, {1e-13, 0, {}});
    ASSERT_TRUE(report.converged);
    EXPECT_TRUE(report.conditions_hold);
    EXPECT_LT(oracle::max_abs_diff(report.U, oracle::to_eigen(U)), 1e-9);
}

TEST(DirichletSolve, HomogeneousProblemApproximatesTheClosedForm) {
    // s = 0.2, P = 1, N = 256 has max-norm error close to 4.965e-4
    const FracOrder s(0.2);
    const Grid1D grid(1.0, 256);
    const analytic::DydaSolution exact{1.0, s, 1.0};
    const auto kernel = weights_1d(grid, s);
    const auto system = make_system_1d(kernel, dyda_exterior_1d(1.0, s, 1.0, 1.0), [&](double x) { return exact.f(x); });
    const auto report = solve_dirichlet(system, {1e-12, 0, {}});
    ASSERT_TRUE(report.converged);
    double err = 0.0;
    for (int i = 1; i < grid.N; ++i) err = std::max(err, std::abs(report.U[i - 1] - exact.u(grid.node(i))));
    EXPECT_NEAR(err, 4.965e-4, 0.05 * 4.965e-4);
}

TEST(DirichletSolve, TwoDimensionalSystemMatchesDenseSolve) {
    const FracOrder s(0.6);
    const auto kernel = weights_2d(Grid2D(1.0, 8), s, 1.0, 0.0);
    const analytic::DydaSolution2D exact{0.0, s, 1.3};
    const auto system = make_system_2d(kernel, dyda_exterior_2d(0.0, s, 1.3, 1.0),
                                       [&](double x, double y) { return exact.f(x, y); });
    const auto report = solve_dirichlet(system, {1e-13, 0, {}});
    ASSERT_TRUE(report.converged);
    const Eigen::VectorXd ref =
        oracle::bttb(kernel.w, static_cast<long>(kernel.side())).lu().solve(oracle::to_eigen(system.rhs()));
    EXPECT_LT(oracle::max_abs_diff(report.U, ref), 1e-9);
}

TEST(DiscreteSystem, RightHandSideChecksShapes) {
    const auto kernel = weights_1d(Grid1D(1.0, 16), FracOrder(0.3));
    System1D system{ToeplitzOperator1D(kernel), std::vector<double>(15, 1.0), std::vector<double>(14, 1.0), true};
    EXPECT_THROW((void)system.rhs(), ShapeMismatch);
}

TEST(DenseSolve, AgreesWithEigenOracle) {
    std::mt19937_64 rng(10);
    const auto kernel = weights_1d(Grid1D(1.0, 24), FracOrder(0.6));
    const ToeplitzOperator1D op(kernel);
    const auto b = oracle::random_vector(op.size(), rng);
    const auto report = dense_solve(op, b);
    const Eigen::VectorXd ref = oracle::toeplitz(kernel.w).lu().solve(oracle::to_eigen(b));
    EXPECT_EQ(report.method, SolveMethod::dense);
    EXPECT_LT(oracle::max_abs_diff(report.U, ref), 1e-12 * ref.cwiseAbs().maxCoeff());
}

TEST(Drift, DenseMatrixMatchesOracleAssembly) {
    const auto kernel = weights_2d(Grid2D(1.0, 10), FracOrder(0.4), 0.5, 5.0);
    const auto drift = assemble_drift(kernel, Potential::harmonic(2.0));
    const auto A = drift.dense_matrix();
    const Eigen::MatrixXd ref = drift_oracle(kernel, 2.0);
    const std::size_t n = drift.size();
    double worst = 0.0;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) worst = std::max(worst, std::abs(A[r * n + c] - ref(r, c)));
    EXPECT_LT(worst, 1e-12 * std::abs(kernel(0, 0)));

    std::mt19937_64 rng(12);
    const auto u = oracle::random_vector(n, rng);
    EXPECT_LT(oracle::max_abs_diff(drift.apply(u), ref * oracle::to_eigen(u)), 1e-11 * std::abs(kernel(0, 0)));
}

TEST(Drift, DominanceMarginMatchesBruteForce) {
    for (double kappa : {0.0, 1.0, 8.0}) {
        const auto kernel = weights_2d(Grid2D(1.0, 12), FracOrder(0.6), 0.5, 100.0);
        const auto drift = assemble_drift(kernel, Potential::harmonic(kappa));
        const Eigen::MatrixXd A = drift_oracle(kernel, kappa);
        double best = INFINITY;
        for (Eigen::Index r = 0; r < A.rows(); ++r) {
            best = std::min(best, A(r, r) - (A.row(r).cwiseAbs().sum() - std::abs(A(r, r))));
        }
        EXPECT_NEAR(drift.margin(), best, 1e-10 * std::abs(kernel(0, 0))) << "kappa=" << kappa;
    }
}

TEST(ExitTime, BiCGStabMatchesDenseOracle) {
    const auto kernel = weights_2d(Grid2D(1.0, 16), FracOrder(0.6), 0.5, 100.0);
    const auto drift = assemble_drift(kernel, Potential::harmonic(4.0));
    const auto report = solve_exit_time(drift, {1e-12, 0, {}});
    ASSERT_TRUE(report.converged);
    EXPECT_EQ(report.method, SolveMethod::bicgstab);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(drift.size()));
    const Eigen::VectorXd ref = drift_oracle(kernel, 4.0).lu().solve(ones);
    EXPECT_LT(oracle::max_abs_diff(report.U, ref), 1e-9 * ref.maxCoeff());
    for (double v : report.U) EXPECT_GT(v, 0.0);
}

TEST(ExitTime, FallsBackToDenseOnSmallGrids) {
    const auto kernel = weights_2d(Grid2D(1.0, 12), FracOrder(0.3), 0.5, 10.0);
    const auto drift = assemble_drift(kernel, Potential::harmonic(1.0));
    const auto report = solve_exit_time(drift, {1e-14, 1, {}});
    EXPECT_EQ(report.method, SolveMethod::dense);
    EXPECT_TRUE(report.converged);
    EXPECT_LT(report.residual, 1e-12);
}

TEST(ExitTime, NoDriftSolutionHasTheSquareSymmetries) {
    const int N = 16;
    const auto kernel = weights_2d(Grid2D(1.0, N), FracOrder(0.4), 0.5, 100.0);
    const auto report = solve_exit_time(assemble_drift(kernel, Potential::constant()), {1e-13, 0, {}});
    ASSERT_TRUE(report.converged);
    const Grid2D& grid = kernel.grid;
    auto U = [&](int i, int j) { return report.U[grid.interior_index(i, j)]; };
    for (int i = 1; i < N; ++i) {
        for (int j = 1; j < N; ++j) {
            EXPECT_NEAR(U(i, j), U(j, i), 1e-10);
            EXPECT_NEAR(U(i, j), U(N - i, j), 1e-10);
            EXPECT_NEAR(U(i, j), U(i, N - j), 1e-10);
        }
    }
}
