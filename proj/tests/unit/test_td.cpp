#include "mlsa/bias.hpp"
#include "mlsa/engine.hpp"
#include "mlsa/error.hpp"
#include "mlsa/td.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mlsa;

TEST(ProblematicMrp, Definition) {
    const Mrp m = problematic_mrp();
    EXPECT_EQ(m.nS, 4u);
    EXPECT_EQ(m.gamma, 0.9);
    EXPECT_EQ(m.r(0), 0.0);
    EXPECT_EQ(m.r(1), 1.0);
    EXPECT_EQ(m.r(2), 3.0);
    EXPECT_EQ(m.r(3), 0.0);
    for (Eigen::Index s = 0; s < 4; ++s) EXPECT_NEAR(m.PS.row(s).sum(), 1.0, 1e-15);
    EXPECT_TRUE(FiniteChain::from_kernel(m.PS).is_ergodic());
}

TEST(Features, PolynomialColumnsSumToOne) {
    const auto f = polynomial_features(4);
    for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(f.Phi.col(j).sum(), 1.0, 1e-15);
    EXPECT_NEAR(f.Phi(2, 2), 9.0 / 30.0, 1e-15);
    EXPECT_NEAR(f.Phi(3, 1), 4.0 / 10.0, 1e-15);
}

TEST(Features, RescaleMeetsBound) {
    const auto f = rescale_to_unit_ball(polynomial_features(4, 2, false), 0.9);
    EXPECT_LE(f.Phi.rowwise().norm().maxCoeff(), 1.0 / std::sqrt(1.9) + 1e-15);
}

TEST(TdProblem, NegativeDefiniteMeanMatrix) {
    const auto inst = td_problem(problematic_mrp(), polynomial_features(4));
    const Matrix sym = -0.5 * (inst.problem.Abar + inst.problem.Abar.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
    EXPECT_EQ(inst.pairs.size(), 8u);
}

TEST(TdProblem, PairStationaryMarginalizes) {
    const Mrp m = problematic_mrp();
    const auto inst = td_problem(m, polynomial_features(4));
    Vector marginal = Vector::Zero(4);
    for (std::size_t x = 0; x < inst.pairs.size(); ++x) {
        const auto [s, t] = inst.pairs[x];
        marginal(static_cast<Eigen::Index>(s)) += inst.chain.stationary()(static_cast<Eigen::Index>(x));
        EXPECT_NEAR(inst.chain.stationary()(static_cast<Eigen::Index>(x)),
                    inst.state_chain.stationary()(static_cast<Eigen::Index>(s)) *
                        m.PS(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)),
                    1e-12);
    }
    EXPECT_LT((marginal - inst.state_chain.stationary()).norm(), 1e-12);
}

TEST(TdProblem, TabularTargetIsValueFunction) {
    const Mrp m = problematic_mrp();
    const auto inst = td_problem(m, tabular_features(4));
    // Closed-form value function by an independent solve.
    const Matrix I = Matrix::Identity(4, 4);
    const Vector V = (I - m.gamma * m.PS).colPivHouseholderQr().solve(m.r);
    EXPECT_LT((inst.problem.theta_star - V).norm(), 1e-9);
    const auto fp = projected_fixed_point(m, tabular_features(4));
    EXPECT_LT(fp.value_error, 1e-9);
}

TEST(TdProblem, ProjectedFixedPointAgreesWithPairChain) {
    const Mrp m = problematic_mrp();
    const auto f = polynomial_features(4);
    const auto inst = td_problem(m, f);
    const auto fp = projected_fixed_point(m, f);
    EXPECT_LT((inst.problem.Abar - fp.Abar).norm(), 1e-12);
    EXPECT_LT((inst.problem.theta_star - fp.theta_star).norm(), 1e-8 * fp.theta_star.norm());
    EXPECT_GT(fp.value_error, 0.0);
}

TEST(TdProblem, ZeroDiscountIsWeightedLeastSquares) {
    Mrp m = problematic_mrp();
    m.gamma = 0.0;
    const auto f = polynomial_features(4);
    const auto fp = projected_fixed_point(m, f);
    const Vector pi = FiniteChain::from_kernel(m.PS).stationary();
    const Matrix G = f.Phi.transpose() * pi.asDiagonal() * f.Phi;
    const Vector rhs = f.Phi.transpose() * pi.asDiagonal() * m.r;
    EXPECT_LT((G.ldlt().solve(rhs) - fp.theta_star).norm(), 1e-9);
}

TEST(TdProblem, NegativeDefinitenessMargin) {
    for (double gamma : {0.0, 0.5, 0.9, 0.99}) {
        Mrp m = problematic_mrp();
        m.gamma = gamma;
        const auto f = polynomial_features(4);
        const auto inst = td_problem(m, f);
        const Vector& pi = inst.state_chain.stationary();
        const Matrix gram = f.Phi.transpose() * pi.asDiagonal() * f.Phi;
        const double rho = Eigen::SelfAdjointEigenSolver<Matrix>(gram).eigenvalues().minCoeff();
        const Matrix sym = -0.5 * (inst.problem.Abar + inst.problem.Abar.transpose());
        const double lam = Eigen::SelfAdjointEigenSolver<Matrix>(sym).eigenvalues().minCoeff();
        EXPECT_GE(lam * (1 + 1e-9), (1 - gamma) * rho);
    }
}

TEST(TdProblem, RankDeficientFeaturesRejected) {
    FeatureMap f;
    f.Phi = Matrix::Ones(4, 2);
    try {
        td_problem(problematic_mrp(), f);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RankDeficientFeatures);
    }
}

TEST(SemiSimulator, ZeroBias) {
    const auto inst = semi_simulator_problem(problematic_mrp());
    EXPECT_TRUE(zero_bias_condition(inst.problem, inst.chain, 1e-12).holds);
    for (double alpha : {0.01, 0.02, 0.05}) {
        EXPECT_LT(exact_stationary_mean(inst.problem, inst.chain, alpha).bias.norm(), 1e-9);
    }
    EXPECT_LT((inst.problem.theta_star - value_function(problematic_mrp())).norm(), 1e-9);
}

TEST(MarkovianTd, NonzeroBiasLinearInStepsize) {
    const auto inst = td_problem(problematic_mrp(), polynomial_features(4));
    EXPECT_FALSE(zero_bias_condition(inst.problem, inst.chain, 1e-9).holds);
    const double b1 = exact_stationary_mean(inst.problem, inst.chain, 0.02).bias.norm();
    const double b2 = exact_stationary_mean(inst.problem, inst.chain, 0.01).bias.norm();
    EXPECT_GT(b1, 1e-6);
    EXPECT_NEAR(std::log2(b1 / b2), 1.0, 0.1);
}

TEST(MarkovianTd, PairChainMatchesStateSimulation) {
    const Mrp m = problematic_mrp();
    const auto f = polynomial_features(4);
    const auto inst = td_problem(m, f);
    const std::size_t N = 100'000, batches = 50, per = N / batches;

    // Batch means of vec A over a state-chain path and a pair-chain path.
    auto batch_means = [&](auto&& next_matrix) {
        std::vector<Vector> out;
        for (std::size_t bi = 0; bi < batches; ++bi) {
            Vector acc = Vector::Zero(9);
            for (std::size_t i = 0; i < per; ++i) acc += next_matrix().reshaped();
            out.push_back(acc / static_cast<double>(per));
        }
        return out;
    };
    ChainSampler states(inst.state_chain, 1, 16);
    auto from_states = batch_means([&] {
        const std::size_t s = states.state();
        const std::size_t t = states.step();
        const Vector phi = f.Phi.row(static_cast<Eigen::Index>(s)).transpose();
        const Vector nxt = f.Phi.row(static_cast<Eigen::Index>(t)).transpose();
        return Matrix(phi * (m.gamma * nxt - phi).transpose());
    });
    ChainSampler pairs(inst.chain, 2, 16);
    auto from_pairs = batch_means([&] {
        const Matrix A = inst.problem.A[pairs.state()];
        pairs.step();
        return A;
    });
    auto stats = [](const std::vector<Vector>& v) {
        Vector mean = Vector::Zero(v[0].size()), var = Vector::Zero(v[0].size());
        for (const auto& x : v) mean += x;
        mean /= static_cast<double>(v.size());
        for (const auto& x : v) var += (x - mean).cwiseAbs2();
        var /= static_cast<double>(v.size() - 1) * static_cast<double>(v.size());
        return std::pair{mean, var};
    };
    const auto [m1, v1] = stats(from_states);
    const auto [m2, v2] = stats(from_pairs);
    for (Eigen::Index i = 0; i < 9; ++i) {
        const double se = std::sqrt(v1(i) + v2(i));
        EXPECT_LE(std::abs(m1(i) - m2(i)), 3.0 * se + 1e-15) << "entry " << i;
    }
}
