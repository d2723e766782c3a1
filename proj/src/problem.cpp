#include "mlsa/problem.hpp"

#include "mlsa/error.hpp"
#include "mlsa/rng.hpp"
#include "streams.hpp"

#include <algorithm>
#include <cmath>

namespace mlsa {

double spectral_abscissa(const Matrix& M) {
    Eigen::EigenSolver<Matrix> solver(M, false);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::SpectralFailure, "eigenvalue iteration did not converge");
    }
    return solver.eigenvalues().real().maxCoeff();
}

LsaProblem build_problem(const FiniteChain& chain, std::vector<Matrix> A, std::vector<Vector> b,
                         bool normalize, std::string label) {
    const std::size_t n = chain.size();
    if (A.size() != n || b.size() != n) {
        throw Error(ErrorCode::InvalidParameter, "need exactly one A(x) and b(x) per state");
    }
    const Eigen::Index d = A.front().rows();
    if (d == 0) throw Error(ErrorCode::InvalidParameter, "dimension must be positive");
    for (std::size_t x = 0; x < n; ++x) {
        if (A[x].rows() != d || A[x].cols() != d || b[x].size() != d) {
            throw Error(ErrorCode::InvalidParameter,
                        "inconsistent dimensions at state " + std::to_string(x));
        }
    }

    LsaProblem p;
    p.n = n;
    p.d = static_cast<std::size_t>(d);
    p.label = std::move(label);
    double a_max = 0.0;
    for (const auto& M : A) a_max = std::max(a_max, M.operatorNorm());
    if (normalize && a_max > 0.0) {
        for (auto& M : A) M /= a_max;
        p.scale = a_max;
    }

    const Vector& pi = chain.stationary();
    p.Abar = Matrix::Zero(d, d);
    p.bbar = Vector::Zero(d);
    p.A_max = 0.0;
    p.b_max = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        p.Abar += pi(static_cast<Eigen::Index>(x)) * A[x];
        p.bbar += pi(static_cast<Eigen::Index>(x)) * b[x];
        p.A_max = std::max(p.A_max, A[x].operatorNorm());
        p.b_max = std::max(p.b_max, b[x].norm());
    }
    p.exceeds_unit_bound = p.A_max > 1.0 + 1e-12;
    p.A = std::move(A);
    p.b = std::move(b);

    Eigen::PartialPivLU<Matrix> lu(p.Abar);
    if (!(lu.rcond() >= 1e-14)) {
        throw Error(ErrorCode::SingularMeanMatrix,
                    "reciprocal condition estimate " + std::to_string(lu.rcond()));
    }
    p.theta_star = lu.solve(-p.bbar);
    if (!(spectral_abscissa(p.Abar) < 0.0)) {
        throw Error(ErrorCode::NotHurwitz, "mean matrix has an eigenvalue with Re >= 0");
    }
    return p;
}

Matrix solve_lyapunov(const Matrix& M) {
    const Eigen::Index d = M.rows();
    const Matrix I = Matrix::Identity(d, d);
    // vec(M^T G) = (I kron M^T) vec(G), vec(G M) = (M^T kron I) vec(G).
    Matrix K(d * d, d * d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            K.block(i * d, j * d, d, d) = I(i, j) * M.transpose() + M(j, i) * I;
        }
    }
    const Vector rhs = (-I).reshaped();
    Eigen::PartialPivLU<Matrix> lu(K);
    if (!(lu.rcond() > 1e-15)) {
        throw Error(ErrorCode::LyapunovFailure, "Kronecker system is singular");
    }
    Matrix G = lu.solve(rhs).reshaped(d, d);
    return 0.5 * (G + G.transpose());
}

LyapunovCert lyapunov_certificate(const LsaProblem& problem) {
    const Matrix& Abar = problem.Abar;
    if (!(spectral_abscissa(Abar) < 0.0)) {
        throw Error(ErrorCode::NotHurwitz, "mean matrix has an eigenvalue with Re >= 0");
    }
    LyapunovCert cert;
    cert.Gamma = solve_lyapunov(Abar);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cert.Gamma, Eigen::EigenvaluesOnly);
    cert.gamma_min = eig.eigenvalues().minCoeff();
    cert.gamma_max = eig.eigenvalues().maxCoeff();
    if (!(cert.gamma_min > 0.0)) {
        throw Error(ErrorCode::LyapunovFailure, "certificate is not positive definite");
    }
    const Matrix I = Matrix::Identity(Abar.rows(), Abar.cols());
    cert.residual = (Abar.transpose() * cert.Gamma + cert.Gamma * Abar + I).operatorNorm();
    const double s_min = Eigen::JacobiSVD<Matrix>(Abar).singularValues().minCoeff();
    cert.kappa = 720.0 * cert.gamma_max * cert.gamma_max / cert.gamma_min / (s_min * s_min) *
                 problem.b_max * problem.b_max;
    return cert;
}

AdmissibilityReport stepsize_admissible(const LsaProblem& problem, const FiniteChain& chain,
                                        double alpha, const LyapunovCert& cert) {
    if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidParameter, "stepsize must be positive");
    AdmissibilityReport r;
    const double eps = std::min(alpha, std::nextafter(1.0, 0.0));
    r.tau_alpha = mixing_time(chain, problem.A, problem.b, eps);
    r.product = alpha * static_cast<double>(r.tau_alpha);
    r.bound = 0.05 / (95.0 * cert.gamma_max);
    r.admissible = r.product < r.bound;
    return r;
}

AdmissibilityReport stepsize_admissible(const LsaProblem& problem, const FiniteChain& chain,
                                        double alpha) {
    return stepsize_admissible(problem, chain, alpha, lyapunov_certificate(problem));
}

double largest_admissible_stepsize(const LsaProblem& problem, const FiniteChain& chain,
                                   double alpha_hi, double shrink) {
    const LyapunovCert cert = lyapunov_certificate(problem);
    for (double alpha = alpha_hi; alpha > 1e-300; alpha *= shrink) {
        if (stepsize_admissible(problem, chain, alpha, cert).admissible) return alpha;
    }
    throw Error(ErrorCode::InvalidParameter, "no admissible stepsize found");
}

std::pair<FiniteChain, LsaProblem> random_problem(std::size_t n, std::size_t d, std::uint64_t seed) {
    if (d < 1) throw Error(ErrorCode::InvalidParameter, "random problem needs d >= 1");
    FiniteChain chain = random_ergodic_chain(n, seed);
    const Vector& pi = chain.stationary();
    const auto dim = static_cast<Eigen::Index>(d);

    RandomStream normals(seed, streams::kMeanMatrix);
    Matrix Abar(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) Abar(i, j) = normals.normal();
    const double abscissa = spectral_abscissa(Abar);
    if (!(abscissa < 0.0)) Abar -= 2.0 * abscissa * Matrix::Identity(dim, dim);

    RandomStream noise(seed, streams::kNoiseMatrices);
    std::vector<Matrix> E(n, Matrix::Zero(dim, dim));
    Matrix weighted = Matrix::Zero(dim, dim);
    for (std::size_t x = 0; x + 1 < n; ++x) {
        for (Eigen::Index i = 0; i < dim; ++i)
            for (Eigen::Index j = 0; j < dim; ++j) E[x](i, j) = noise.uniform(-1.0, 1.0);
        weighted += pi(static_cast<Eigen::Index>(x)) * E[x];
    }
    E[n - 1] = -weighted / pi(static_cast<Eigen::Index>(n - 1));

    std::vector<Matrix> A(n);
    for (std::size_t x = 0; x < n; ++x) A[x] = Abar + E[x];

    RandomStream offsets(seed, streams::kOffsets);
    std::vector<Vector> b(n, Vector(dim));
    for (auto& v : b)
        for (Eigen::Index i = 0; i < dim; ++i) v(i) = offsets.uniform(-1.0, 1.0);

    LsaProblem problem = build_problem(chain, std::move(A), std::move(b), /*normalize=*/true,
                                       "random-n" + std::to_string(n) + "-d" + std::to_string(d) +
                                           "-s" + std::to_string(seed));
    return {std::move(chain), std::move(problem)};
}

}  // namespace mlsa
