#include "fixtures.hpp"
#include "oracles.hpp"

#include "mlsa/bias.hpp"
#include "mlsa/error.hpp"
#include "mlsa/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mlsa;

TEST(ExactMean, TwoStateScalarMatchesCramer) {
    const auto [chain, p] = fixtures::two_state_scalar();
    for (double alpha : {0.01, 0.05, 0.2}) {
        const auto sol = exact_stationary_mean(p, chain, alpha);
        const double ref =
            oracle::two_state_scalar_mean(chain.kernel(), -1.0, -0.5, 1.0, 0.0, alpha);
        EXPECT_NEAR(sol.mean(0), ref, 1e-12);
        EXPECT_LT(sol.residual, 1e-9 * (1 + sol.z.norm()));
        EXPECT_GT(std::abs(sol.bias(0)), 1e-4);
    }
}

TEST(ExactMean, RandomInstancesMatchJointMomentIteration) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto [chain, p] = random_problem(5, 3, seed);
        const double alpha = 0.1;
        const auto sol = exact_stationary_mean(p, chain, alpha);
        const Vector ref = oracle::joint_moment_limit(p, chain, alpha);
        EXPECT_LT((sol.mean - ref).norm(), 1e-8 * (1 + ref.norm())) << "seed " << seed;
        EXPECT_LT(sol.delta().size(), sol.z.size() + 1);
    }
}

TEST(ExactMean, IidChainHasNoBias) {
    Vector pi(3);
    pi << 0.2, 0.5, 0.3;
    const auto chain = fixtures::iid_chain(pi);
    std::vector<Matrix> A{-Matrix::Identity(2, 2), Matrix::Constant(2, 2, 0.1) - Matrix::Identity(2, 2),
                          -2 * Matrix::Identity(2, 2)};
    std::vector<Vector> b{Vector::Ones(2), -Vector::Ones(2), Vector::Constant(2, 3.0)};
    const auto p = build_problem(chain, A, b, true);
    for (double alpha : {0.01, 0.1, 0.3}) {
        EXPECT_LT(exact_stationary_mean(p, chain, alpha).bias.norm(), 1e-10);
    }
}

TEST(ExactMean, ZeroOffsetGivesZero) {
    const auto [chain, base] = random_problem(4, 2, 9);
    std::vector<Vector> zeros(4, Vector::Zero(2));
    const auto p = build_problem(chain, base.A, zeros, false);
    const auto sol = exact_stationary_mean(p, chain, 0.1);
    EXPECT_EQ(sol.z.norm(), 0.0);
    EXPECT_EQ(sol.mean.norm(), 0.0);
}

TEST(ExactMean, SingularSystemIsReported) {
    // P has eigenvalue -0.4, so (1 - alpha)(-0.4) = 1 at alpha = 3.5.
    const auto chain = fixtures::symmetric_two_state(0.7);
    const auto p = build_problem(chain, {Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, -1.0)},
                                 {Vector::Ones(1), Vector::Zero(1)}, false);
    try {
        exact_stationary_mean(p, chain, 3.5);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::OracleSingular);
    }
}

TEST(ExactMean, TinyStepsizesStayWellConditioned) {
    const auto [chain, p] = random_problem(8, 4, 1);
    const BiasExpansion ex = bias_expansion(p, chain, 2);
    for (double alpha : {1e-6, 1e-9}) {
        const auto sol = exact_stationary_mean(p, chain, alpha);
        EXPECT_GT(sol.rcond, kOracleRcond);
        EXPECT_LT(sol.residual, 1e-12);
        EXPECT_LT((sol.bias - ex.truncated_bias(alpha, 2)).norm(), 1e-3 * alpha * alpha * ex.B[1].norm());
    }
}

TEST(ExactMean, RemainderKeepsFourthOrderAtSmallStepsizes) {
    const auto [chain, p] = random_problem(8, 4, 1);
    const BiasExpansion ex = bias_expansion(p, chain, 3);
    double prev = 0.0;
    for (double alpha = 0.02; alpha > 0.002; alpha /= 2) {
        const double e = (exact_stationary_mean(p, chain, alpha).bias - ex.truncated_bias(alpha, 3)).norm();
        if (prev > 0.0) EXPECT_NEAR(std::log2(prev / e), 4.0, 0.1);
        prev = e;
    }
}

TEST(Expansion, IidChainHasZeroCoefficients) {
    Vector pi(2);
    pi << 0.4, 0.6;
    const auto chain = fixtures::iid_chain(pi);
    const auto p = build_problem(chain, {Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, -0.2)},
                                 {Vector::Ones(1), Vector::Constant(1, -2.0)}, false);
    const auto ex = bias_expansion(p, chain, 4);
    EXPECT_LT(ex.Upsilon.norm(), 1e-14);
    for (const auto& B : ex.B) EXPECT_LT(B.norm(), 1e-14);
}

TEST(Expansion, ConstantAHasZeroCoefficients) {
    const auto chain = random_ergodic_chain(5, 4);
    Matrix M(2, 2);
    M << -1.0, 0.3, -0.2, -0.8;
    std::vector<Matrix> A(5, M);
    std::vector<Vector> b;
    for (int x = 0; x < 5; ++x) b.push_back(Vector::Constant(2, std::cos(3.0 * x)));
    const auto p = build_problem(chain, A, b, false);
    const auto ex = bias_expansion(p, chain, 3);
    for (const auto& B : ex.B) EXPECT_LT(B.norm(), 1e-12);
    for (double alpha : {0.01, 0.05, 0.2}) {
        EXPECT_LT(exact_stationary_mean(p, chain, alpha).bias.norm(), 1e-9);
    }
}

TEST(Expansion, PiAnnihilation) {
    const auto [chain, p] = random_problem(6, 3, 17);
    const auto ex = bias_expansion(p, chain, 2);
    EXPECT_LT(pi_apply(ex.Upsilon, ex.pi, ex.d).norm(), 1e-12);
    RandomStream rng(5, 5);
    for (int t = 0; t < 5; ++t) {
        Vector v(ex.Xi.M.rows());
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
        EXPECT_LT(pi_apply(ex.Xi.M * v, ex.pi, ex.d).norm(), 1e-12 * v.norm());
    }
}

TEST(Expansion, OrderOfRemainderOnTwoStateInstance) {
    const auto [chain, p] = fixtures::two_state_scalar();
    const auto ex = bias_expansion(p, chain, 3);
    for (std::size_t m = 1; m <= 3; ++m) {
        const auto e = [&](double alpha) {
            return (exact_stationary_mean(p, chain, alpha).bias - ex.truncated_bias(alpha, m)).norm();
        };
        const double slope = std::log2(e(0.02) / e(0.01));
        EXPECT_GE(slope, m + 0.5) << "m=" << m;
        EXPECT_LE(slope, m + 1.5) << "m=" << m;
    }
}

TEST(Expansion, FirstCoefficientIsBiasDerivative) {
    const auto [chain, p] = random_problem(5, 2, 23);
    const auto ex = bias_expansion(p, chain, 1);
    const double h = 1e-5;
    const Vector fd = exact_stationary_mean(p, chain, h).bias / h;
    EXPECT_LT((fd - ex.B[0]).norm(), 1e-3 * (1 + ex.B[0].norm()));
}

TEST(InfiniteSeries, MatchesExactMean) {
    const auto [chain, p] = fixtures::two_state_scalar();
    const auto ex = bias_expansion(p, chain, 1);
    ASSERT_LT(0.05 * ex.xi_norm, 1.0);
    EXPECT_NEAR(infinite_series_mean(ex, p, 0.05)(0),
                exact_stationary_mean(p, chain, 0.05).mean(0), 1e-10);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto [c, q] = random_problem(8, 4, seed);
        const auto e = bias_expansion(q, c, 1);
        for (double frac : {0.1, 0.5, 0.9}) {
            const double alpha = frac / e.xi_norm;
            const Vector a = infinite_series_mean(e, q, alpha);
            const Vector b = exact_stationary_mean(q, c, alpha).mean;
            EXPECT_LT((a - b).norm(), 1e-9 * (1 + q.theta_star.norm()));
        }
    }
}

TEST(InfiniteSeries, OutsideRadiusIsFlagged) {
    const auto [chain, p] = fixtures::two_state_scalar();
    const auto ex = bias_expansion(p, chain, 1);
    const double alpha = 1.5 / ex.xi_norm;
    try {
        infinite_series_mean(ex, p, alpha);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SeriesDivergent);
    }
    EXPECT_NO_THROW(infinite_series_mean(ex, p, alpha, true));
}

TEST(ZeroBias, IidHoldsAndTwoStateFails) {
    Vector pi(2);
    pi << 0.5, 0.5;
    const auto iid = fixtures::iid_chain(pi);
    const auto p = build_problem(iid, {Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, -0.5)},
                                 {Vector::Ones(1), Vector::Zero(1)}, false);
    const auto r = zero_bias_condition(p, iid, 1e-12);
    EXPECT_TRUE(r.holds);
    EXPECT_LT(r.max_violation, 1e-15);

    const auto [chain, q] = fixtures::two_state_scalar();
    const auto r2 = zero_bias_condition(q, chain, 1e-12);
    EXPECT_FALSE(r2.holds);
    EXPECT_GT(std::abs(exact_stationary_mean(q, chain, 0.05).bias(0)), 1e-6);
}

TEST(ReversibleBound, HoldsAcrossGaps) {
    for (double p : {0.3, 0.1, 0.03}) {
        const auto [chain, q] = fixtures::two_state_scalar(p);
        const auto ex = bias_expansion(q, chain, 5);
        const auto r = reversible_bias_bound(q, chain, ex, 5);
        EXPECT_NEAR(r.gap, 2 * p, 1e-12);
        EXPECT_TRUE(r.all_satisfied()) << "p=" << p;
        EXPECT_EQ(r.rows.size(), 5u);
    }
}

TEST(ReversibleBound, IidBoundIsZero) {
    Vector pi(2);
    pi << 0.3, 0.7;
    const auto chain = fixtures::iid_chain(pi);
    const auto p = build_problem(chain, {Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, -0.5)},
                                 {Vector::Ones(1), Vector::Zero(1)}, false);
    const auto r = reversible_bias_bound(p, chain, bias_expansion(p, chain, 3), 3);
    for (const auto& row : r.rows) {
        EXPECT_EQ(row.bound, 0.0);
        EXPECT_TRUE(row.satisfied);
    }
}

TEST(ReversibleBound, NonReversibleRejected) {
    const auto [chain, p] = random_problem(4, 1, 3);
    ASSERT_FALSE(spectral_report(chain).reversible);
    try {
        reversible_bias_bound(p, chain, bias_expansion(p, chain, 1), 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotReversible);
    }
}
