#include "mlsa/td.hpp"

#include "mlsa/error.hpp"

#include <cmath>

namespace mlsa {

namespace {

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

void validate_features(const Mrp& mrp, const FeatureMap& f) {
    if (f.Phi.rows() != idx(mrp.nS) || f.Phi.cols() == 0) {
        throw Error(ErrorCode::InvalidParameter, "feature matrix must have one row per state");
    }
    const Vector sv = Eigen::JacobiSVD<Matrix>(f.Phi).singularValues();
    if (f.Phi.cols() > f.Phi.rows() || !(sv.minCoeff() > 1e-10)) {
        throw Error(ErrorCode::RankDeficientFeatures, "feature columns are linearly dependent");
    }
}

void require_negative_definite(const Matrix& Abar) {
    const Matrix sym = -0.5 * (Abar + Abar.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 0.0)) {
        throw Error(ErrorCode::NotHurwitz, "-Abar is not positive definite");
    }
}

Matrix td_matrix(const Mrp& mrp, const FeatureMap& f, std::size_t s, std::size_t next) {
    const Vector phi = f.Phi.row(idx(s)).transpose();
    const Vector phi_next = f.Phi.row(idx(next)).transpose();
    return phi * (mrp.gamma * phi_next - phi).transpose();
}

}  // namespace

void validate_mrp(const Mrp& mrp) {
    if (mrp.PS.rows() != idx(mrp.nS) || mrp.PS.cols() != idx(mrp.nS) || mrp.r.size() != idx(mrp.nS)) {
        throw Error(ErrorCode::InvalidParameter, "MRP dimensions are inconsistent");
    }
    if (!(mrp.gamma >= 0.0 && mrp.gamma < 1.0)) {
        throw Error(ErrorCode::InvalidParameter, "discount must lie in [0,1)");
    }
    FiniteChain::from_kernel(mrp.PS);  // validates the kernel
}

Mrp problematic_mrp() {
    Mrp m;
    m.nS = 4;
    m.PS.resize(4, 4);
    m.PS << 0.1, 0.9, 0.0, 0.0,
            0.1, 0.0, 0.9, 0.0,
            0.0, 0.9, 0.0, 0.1,
            0.0, 0.0, 0.9, 0.1;
    m.r.resize(4);
    m.r << 0.0, 1.0, 3.0, 0.0;
    m.gamma = 0.9;
    m.label = "problematic";
    return m;
}

FeatureMap polynomial_features(std::size_t nS, std::size_t degree, bool normalize_columns) {
    FeatureMap f;
    f.Phi.resize(idx(nS), idx(degree + 1));
    for (std::size_t s = 0; s < nS; ++s) {
        for (std::size_t j = 0; j <= degree; ++j) {
            f.Phi(idx(s), idx(j)) = std::pow(static_cast<double>(s + 1), static_cast<double>(j));
        }
    }
    if (normalize_columns) {
        for (Eigen::Index j = 0; j < f.Phi.cols(); ++j) f.Phi.col(j) /= f.Phi.col(j).sum();
    }
    return f;
}

FeatureMap tabular_features(std::size_t nS) {
    return {Matrix::Identity(idx(nS), idx(nS))};
}

FeatureMap rescale_to_unit_ball(FeatureMap features, double gamma) {
    const double phi_max = features.Phi.rowwise().norm().maxCoeff();
    const double target = 1.0 / std::sqrt(1.0 + gamma);
    if (phi_max > target) features.Phi *= target / phi_max;
    return features;
}

Vector value_function(const Mrp& mrp) {
    validate_mrp(mrp);
    const Matrix M = Matrix::Identity(idx(mrp.nS), idx(mrp.nS)) - mrp.gamma * mrp.PS;
    return M.partialPivLu().solve(mrp.r);
}

TdInstance td_problem(const Mrp& mrp, const FeatureMap& features) {
    validate_mrp(mrp);
    validate_features(mrp, features);
    FiniteChain state_chain = FiniteChain::from_kernel(mrp.PS, mrp.label);
    if (!state_chain.is_ergodic()) {
        throw Error(ErrorCode::InvalidParameter, "MRP chain must be irreducible and aperiodic");
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t s = 0; s < mrp.nS; ++s)
        for (std::size_t t = 0; t < mrp.nS; ++t)
            if (mrp.PS(idx(s), idx(t)) > 0.0) pairs.emplace_back(s, t);

    const std::size_t n = pairs.size();
    Matrix K = Matrix::Zero(idx(n), idx(n));
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y)
            if (pairs[y].first == pairs[x].second)
                K(idx(x), idx(y)) = mrp.PS(idx(pairs[x].second), idx(pairs[y].second));

    std::vector<Matrix> A;
    std::vector<Vector> b;
    for (const auto& [s, t] : pairs) {
        A.push_back(td_matrix(mrp, features, s, t));
        b.push_back(mrp.r(idx(s)) * features.Phi.row(idx(s)).transpose());
    }
    FiniteChain chain = FiniteChain::from_kernel(std::move(K), mrp.label + "-pairs");
    LsaProblem problem =
        build_problem(chain, std::move(A), std::move(b), false, mrp.label + "-td");
    require_negative_definite(problem.Abar);
    return {std::move(chain), std::move(problem), std::move(pairs), std::move(state_chain)};
}

TdInstance semi_simulator_problem(const Mrp& mrp) {
    validate_mrp(mrp);
    const FeatureMap features = tabular_features(mrp.nS);
    FiniteChain state_chain = FiniteChain::from_kernel(mrp.PS, mrp.label);
    if (!state_chain.is_ergodic()) {
        throw Error(ErrorCode::InvalidParameter, "MRP chain must be irreducible and aperiodic");
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t s = 0; s < mrp.nS; ++s)
        for (std::size_t u = 0; u < mrp.nS; ++u)
            if (mrp.PS(idx(s), idx(u)) > 0.0) pairs.emplace_back(s, u);

    const std::size_t n = pairs.size();
    Matrix K = Matrix::Zero(idx(n), idx(n));
    for (std::size_t x = 0; x < n; ++x) {
        const std::size_t s = pairs[x].first;
        for (std::size_t y = 0; y < n; ++y) {
            const auto [s2, u2] = pairs[y];
            K(idx(x), idx(y)) = mrp.PS(idx(s), idx(s2)) * mrp.PS(idx(s2), idx(u2));
        }
    }
    // Rows are products of two stochastic rows; renormalize away rounding.
    for (Eigen::Index x = 0; x < K.rows(); ++x) K.row(x) /= K.row(x).sum();

    std::vector<Matrix> A;
    std::vector<Vector> b;
    for (const auto& [s, u] : pairs) {
        A.push_back(td_matrix(mrp, features, s, u));
        b.push_back(mrp.r(idx(s)) * features.Phi.row(idx(s)).transpose());
    }
    FiniteChain chain = FiniteChain::from_kernel(std::move(K), mrp.label + "-semi-simulator");
    LsaProblem problem =
        build_problem(chain, std::move(A), std::move(b), false, mrp.label + "-semi-simulator");
    require_negative_definite(problem.Abar);
    return {std::move(chain), std::move(problem), std::move(pairs), std::move(state_chain)};
}

ProjectedFixedPoint projected_fixed_point(const Mrp& mrp, const FeatureMap& features) {
    validate_mrp(mrp);
    validate_features(mrp, features);
    const FiniteChain state_chain = FiniteChain::from_kernel(mrp.PS, mrp.label);
    const Vector& pi = state_chain.stationary();
    const Matrix& Phi = features.Phi;
    const Eigen::Index nS = idx(mrp.nS);

    ProjectedFixedPoint out;
    out.Abar = Phi.transpose() * pi.asDiagonal() *
               (mrp.gamma * mrp.PS - Matrix::Identity(nS, nS)) * Phi;
    out.bbar = Phi.transpose() * pi.asDiagonal() * mrp.r;
    Eigen::PartialPivLU<Matrix> lu(out.Abar);
    if (!(lu.rcond() >= 1e-14)) {
        throw Error(ErrorCode::SingularMeanMatrix, "projected Bellman system is singular");
    }
    out.theta_star = lu.solve(-out.bbar);
    out.V = value_function(mrp);
    const Vector diff = Phi * out.theta_star - out.V;
    out.value_error = std::sqrt((pi.array() * diff.array().square()).sum());
    return out;
}

}  // namespace mlsa
