#include "mlsa/error.hpp"
#include "mlsa/problem.hpp"

#include <gtest/gtest.h>

#include <vector>

using namespace mlsa;

namespace {

FiniteChain iid_chain(const Vector& pi) {
    return FiniteChain::from_kernel(Vector::Ones(pi.size()) * pi.transpose());
}

}  // namespace

TEST(BuildProblem, ScalarTarget) {
    const auto chain = random_ergodic_chain(3, 1);
    std::vector<Matrix> A(3, Matrix::Constant(1, 1, -1.0));
    std::vector<Vector> b(3, Vector::Constant(1, 2.0));
    const auto p = build_problem(chain, A, b, false);
    EXPECT_NEAR(p.theta_star(0), 2.0, 1e-14);
}

TEST(BuildProblem, IdentityMeanMatrix) {
    Vector pi(2);
    pi << 0.5, 0.5;
    const auto chain = iid_chain(pi);
    std::vector<Matrix> A(2, -Matrix::Identity(2, 2));
    std::vector<Vector> b{Vector(2), Vector(2)};
    b[0] << 5, -3;
    b[1] << 1, 1;
    const auto p = build_problem(chain, A, b, false);
    EXPECT_NEAR(p.theta_star(0), 3.0, 1e-14);
    EXPECT_NEAR(p.theta_star(1), -1.0, 1e-14);
}

TEST(BuildProblem, SingularAndNonHurwitzAreDistinct) {
    Vector pi(2);
    pi << 0.5, 0.5;
    const auto chain = iid_chain(pi);
    std::vector<Vector> b(2, Vector::Ones(1));
    try {
        build_problem(chain, {Matrix::Zero(1, 1), Matrix::Zero(1, 1)}, b, false);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingularMeanMatrix);
    }
    try {
        build_problem(chain, {Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 0.5)}, b, false);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotHurwitz);
    }
}

TEST(BuildProblem, NormalizationAndFlag) {
    Vector pi(2);
    pi << 0.5, 0.5;
    const auto chain = iid_chain(pi);
    std::vector<Matrix> A{Matrix::Constant(1, 1, -4.0), Matrix::Constant(1, 1, -2.0)};
    std::vector<Vector> b(2, Vector::Ones(1));
    const auto raw = build_problem(chain, A, b, false);
    EXPECT_TRUE(raw.exceeds_unit_bound);
    const auto norm = build_problem(chain, A, b, true);
    EXPECT_FALSE(norm.exceeds_unit_bound);
    EXPECT_NEAR(norm.A_max, 1.0, 1e-15);
    EXPECT_NEAR(norm.Abar(0, 0), -0.75, 1e-15);
    EXPECT_NEAR(norm.scale, 4.0, 0.0);
}

TEST(RandomProblem, RecipeInvariants) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const auto [chain, p] = random_problem(8, 4, seed);
        Matrix avg = Matrix::Zero(4, 4);
        for (std::size_t x = 0; x < 8; ++x) avg += chain.stationary()(x) * p.A[x];
        EXPECT_LT((avg - p.Abar).norm(), 1e-10);
        EXPECT_NEAR(p.A_max, 1.0, 1e-12);
        EXPECT_LT(spectral_abscissa(p.Abar), 0.0);
        EXPECT_LT((p.Abar * p.theta_star + p.bbar).norm(), 1e-10);
        EXPECT_LE(p.Abar.operatorNorm(), p.A_max + 1e-12);
        EXPECT_LE(p.bbar.norm(), p.b_max + 1e-12);
        // Independent solver agrees with the LU target.
        const Vector qr = p.Abar.colPivHouseholderQr().solve(-p.bbar);
        EXPECT_LT((qr - p.theta_star).norm(), 1e-10 * (1 + qr.norm()));
    }
}

TEST(RandomProblem, BitDeterministic) {
    const auto [c1, p1] = random_problem(8, 4, 5);
    const auto [c2, p2] = random_problem(8, 4, 5);
    EXPECT_TRUE(c1.kernel() == c2.kernel());
    for (std::size_t x = 0; x < 8; ++x) {
        EXPECT_TRUE(p1.A[x] == p2.A[x]);
        EXPECT_TRUE(p1.b[x] == p2.b[x]);
    }
    EXPECT_TRUE(p1.theta_star == p2.theta_star);
}

TEST(Lyapunov, DiagonalCases) {
    const Matrix G = solve_lyapunov(-Matrix::Identity(2, 2));
    EXPECT_LT((G - 0.5 * Matrix::Identity(2, 2)).norm(), 1e-14);
    Matrix D = Matrix::Zero(2, 2);
    D.diagonal() << -1.0, -4.0;
    const Matrix G2 = solve_lyapunov(D);
    EXPECT_NEAR(G2(0, 0), 0.5, 1e-14);
    EXPECT_NEAR(G2(1, 1), 0.125, 1e-14);
    EXPECT_NEAR(G2(0, 1), 0.0, 1e-14);
}

TEST(Lyapunov, JordanBlockResidual) {
    Matrix M(2, 2);
    M << -1, 1, 0, -1;
    const Matrix G = solve_lyapunov(M);
    EXPECT_LT((M.transpose() * G + G * M + Matrix::Identity(2, 2)).norm(), 1e-10);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
}

TEST(Lyapunov, CertificateOnRandomInstances) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        for (std::size_t d : {1u, 3u, 6u}) {
            const auto [chain, p] = random_problem(5, d, seed);
            const auto cert = lyapunov_certificate(p);
            EXPECT_LT(cert.residual, 1e-9);
            EXPECT_GT(cert.gamma_min, 0.0);
            EXPECT_LE(cert.gamma_min, cert.gamma_max);
            const double s1 = Eigen::JacobiSVD<Matrix>(p.Abar).singularValues()(0);
            EXPECT_GE(cert.gamma_min * (1 + 1e-12), 1.0 / (2.0 * s1));
            EXPECT_GE(cert.gamma_min * (1 + 1e-12), 0.5);
        }
    }
}

TEST(Admissibility, IidArithmetic) {
    // A = -I (gamma_max = 1/2) on an i.i.d. chain with nonconstant b: tau = 1.
    Vector pi(2);
    pi << 0.5, 0.5;
    const auto chain = iid_chain(pi);
    std::vector<Matrix> A(2, -Matrix::Identity(2, 2));
    std::vector<Vector> b{Vector::Ones(2), -Vector::Ones(2)};
    const auto p = build_problem(chain, A, b, false);
    const auto cert = lyapunov_certificate(p);
    EXPECT_NEAR(cert.gamma_max, 0.5, 1e-14);
    const auto ok = stepsize_admissible(p, chain, 1e-4);
    EXPECT_EQ(ok.tau_alpha, 1u);
    EXPECT_NEAR(ok.bound, 0.05 / 47.5, 1e-18);
    EXPECT_TRUE(ok.admissible);
    const auto big = stepsize_admissible(p, chain, 1.0);
    EXPECT_FALSE(big.admissible);
    const auto edge = stepsize_admissible(p, chain, 0.05 / 47.5, cert);
    EXPECT_EQ(edge.product, edge.bound);
    EXPECT_FALSE(edge.admissible);
}
