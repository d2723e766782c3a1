#include "mlsa/bias.hpp"

#include "mlsa/error.hpp"

#include <cmath>
#include <limits>

namespace mlsa {

namespace {

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

Matrix kron_identity(const Matrix& K, std::size_t d) {
    const Eigen::Index n = K.rows(), m = K.cols(), dd = idx(d);
    Matrix out = Matrix::Zero(n * dd, m * dd);
    for (Eigen::Index x = 0; x < n; ++x) {
        for (Eigen::Index y = 0; y < m; ++y) {
            if (K(x, y) != 0.0) {
                out.block(x * dd, y * dd, dd, dd).diagonal().setConstant(K(x, y));
            }
        }
    }
    return out;
}

Matrix block_diagonal(const std::vector<Matrix>& blocks) {
    const Eigen::Index d = blocks.front().rows();
    const Eigen::Index n = idx(blocks.size());
    Matrix out = Matrix::Zero(n * d, n * d);
    for (Eigen::Index x = 0; x < n; ++x) out.block(x * d, x * d, d, d) = blocks[x];
    return out;
}

Vector stacked_b(const LsaProblem& p) {
    const Eigen::Index d = idx(p.d);
    Vector out(idx(p.n) * d);
    for (std::size_t x = 0; x < p.n; ++x) out.segment(idx(x) * d, d) = p.b[x];
    return out;
}

void require_compatible(const LsaProblem& p, const FiniteChain& chain) {
    if (p.n != chain.size()) {
        throw Error(ErrorCode::InvalidParameter, "problem and chain state counts differ");
    }
}

}  // namespace

LiftedOperator lift_pstar(const FiniteChain& chain, std::size_t d) {
    return {kron_identity(time_reversal(chain), d), OperatorKind::Pstar};
}

LiftedOperator lift_pi(const FiniteChain& chain, std::size_t d) {
    const Eigen::Index n = idx(chain.size());
    return {kron_identity(Vector::Ones(n) * chain.stationary().transpose(), d), OperatorKind::Pi};
}

LiftedOperator lift_d(const LsaProblem& problem) {
    return {block_diagonal(problem.A), OperatorKind::D};
}

LiftedOperator lift_dbar(const LsaProblem& problem) {
    const Eigen::PartialPivLU<Matrix> lu(problem.Abar);
    std::vector<Matrix> blocks;
    blocks.reserve(problem.n);
    for (const auto& A : problem.A) blocks.push_back(lu.solve(A));
    return {block_diagonal(blocks), OperatorKind::Dbar};
}

Vector pi_apply(const Vector& stacked, const Vector& pi, std::size_t d) {
    const Eigen::Index dd = idx(d);
    Vector out = Vector::Zero(dd);
    for (Eigen::Index x = 0; x < pi.size(); ++x) out += pi(x) * stacked.segment(x * dd, dd);
    return out;
}

double weighted_norm(const Matrix& M, const Vector& pi, std::size_t d) {
    const Eigen::Index dd = idx(d);
    Vector w(pi.size() * dd);
    for (Eigen::Index x = 0; x < pi.size(); ++x) w.segment(x * dd, dd).setConstant(std::sqrt(pi(x)));
    const Matrix S = w.asDiagonal() * M * w.cwiseInverse().asDiagonal();
    return Eigen::JacobiSVD<Matrix>(S).singularValues()(0);
}

double weighted_norm(const Vector& stacked, const Vector& pi, std::size_t d) {
    const Eigen::Index dd = idx(d);
    double acc = 0.0;
    for (Eigen::Index x = 0; x < pi.size(); ++x) {
        acc += pi(x) * stacked.segment(x * dd, dd).squaredNorm();
    }
    return std::sqrt(acc);
}

Vector stacked_drift(const LsaProblem& problem) {
    const Eigen::Index d = idx(problem.d);
    Vector out(idx(problem.n) * d);
    for (std::size_t x = 0; x < problem.n; ++x) {
        out.segment(idx(x) * d, d) = problem.A[x] * problem.theta_star + problem.b[x];
    }
    return out;
}

Vector StationarySolution::delta() const {
    const Eigen::Index d = mean.size();
    Vector out = z;
    for (Eigen::Index x = 0; x < z.size() / d; ++x) out.segment(x * d, d) -= mean;
    return out;
}

StationarySolution exact_stationary_mean(const LsaProblem& problem, const FiniteChain& chain,
                                         double alpha) {
    if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidParameter, "stepsize must be positive");
    require_compatible(problem, chain);
    const Matrix Pstar = lift_pstar(chain, problem.d).M;
    const Matrix Pi = lift_pi(chain, problem.d).M;
    const Matrix D = lift_d(problem).M;
    const Eigen::Index N = Pstar.rows();
    const Matrix I = Matrix::Identity(N, N);
    const Matrix system = I - Pstar * (I + alpha * D);
    const Vector rhs = alpha * (Pstar * stacked_b(problem));

    // Left factor I + (1/alpha - 1) Pi rescales the averaged rows, which vanish
    // with alpha, so the condition estimate only flags large stepsizes. The
    // unknown is w = z - 1 kron theta*, whose right-hand side alpha P* f is free
    // of cancellation.
    const Matrix scaled = I - Pstar - alpha * Pstar * D - (1.0 - alpha) * Pi * D;
    const Vector scaled_rhs = alpha * (Pstar * stacked_drift(problem));

    Eigen::PartialPivLU<Matrix> lu(scaled);
    StationarySolution sol;
    sol.rcond = lu.rcond();
    if (!(sol.rcond >= kOracleRcond)) {
        throw Error(ErrorCode::OracleSingular,
                    "stationary-mean system reciprocal condition " + std::to_string(sol.rcond));
    }
    const Vector w = lu.solve(scaled_rhs);
    sol.z = w + problem.theta_star.replicate(static_cast<Eigen::Index>(problem.n), 1);
    sol.residual = (system * sol.z - rhs).norm();
    sol.mean = pi_apply(sol.z, chain.stationary(), problem.d);
    sol.bias = pi_apply(w, chain.stationary(), problem.d);
    return sol;
}

Vector BiasExpansion::truncated_bias(double alpha, std::size_t m) const {
    if (m > B.size()) throw Error(ErrorCode::InvalidParameter, "not enough coefficients");
    Vector out = Vector::Zero(idx(d));
    double power = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
        power *= alpha;
        out += power * B[i];
    }
    return out;
}

BiasExpansion bias_expansion(const LsaProblem& problem, const FiniteChain& chain, std::size_t m) {
    if (m < 1) throw Error(ErrorCode::InvalidParameter, "expansion order must be >= 1");
    require_compatible(problem, chain);
    const std::size_t d = problem.d;
    const Matrix Pstar = lift_pstar(chain, d).M;
    const Matrix Pi = lift_pi(chain, d).M;
    const Matrix D = lift_d(problem).M;
    BiasExpansion ex;
    ex.Dbar = lift_dbar(problem);
    ex.pi = chain.stationary();
    ex.d = d;
    const Eigen::Index N = Pstar.rows();
    const Matrix I = Matrix::Identity(N, N);

    const Eigen::PartialPivLU<Matrix> resolvent(I - Pstar + Pi);
    const Matrix centered = Pstar - Pi;
    ex.Xi.kind = OperatorKind::Xi;
    ex.Xi.M = resolvent.solve(centered * D * (I - Pi * ex.Dbar.M));
    ex.Upsilon = resolvent.solve(centered * stacked_drift(problem));
    ex.xi_norm = weighted_norm(ex.Xi.M, ex.pi, d);

    Vector v = ex.Upsilon;
    for (std::size_t i = 0; i < m; ++i) {
        if (i > 0) v = ex.Xi.M * v;
        ex.B.push_back(-pi_apply(ex.Dbar.M * v, ex.pi, d));
    }
    return ex;
}

Vector infinite_series_mean(const BiasExpansion& expansion, const LsaProblem& problem,
                            double alpha, bool allow_outside) {
    if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidParameter, "stepsize must be positive");
    if (alpha * expansion.xi_norm >= 1.0 && !allow_outside) {
        throw Error(ErrorCode::SeriesDivergent,
                    "alpha=" + std::to_string(alpha) + " is not below 1/||Xi||=" +
                        std::to_string(1.0 / expansion.xi_norm));
    }
    const Eigen::Index N = expansion.Xi.M.rows();
    Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(N, N) - alpha * expansion.Xi.M);
    if (!(lu.rcond() >= kOracleRcond)) {
        throw Error(ErrorCode::OracleSingular, "I - alpha Xi is numerically singular");
    }
    const Vector v = lu.solve(expansion.Upsilon);
    return problem.theta_star - alpha * pi_apply(expansion.Dbar.M * v, expansion.pi, expansion.d);
}

ZeroBiasReport zero_bias_condition(const LsaProblem& problem, const FiniteChain& chain, double tol) {
    require_compatible(problem, chain);
    const Matrix Pstar = time_reversal(chain);
    std::vector<Vector> drift(problem.n);
    for (std::size_t s = 0; s < problem.n; ++s) {
        drift[s] = problem.A[s] * problem.theta_star + problem.b[s];
    }
    ZeroBiasReport r;
    for (std::size_t x = 0; x < problem.n; ++x) {
        Vector g = Vector::Zero(idx(problem.d));
        for (std::size_t s = 0; s < problem.n; ++s) g += Pstar(idx(x), idx(s)) * drift[s];
        r.violation.push_back(g.norm());
        r.max_violation = std::max(r.max_violation, r.violation.back());
    }
    r.holds = r.max_violation <= tol;
    return r;
}

bool ReversibleBoundReport::all_satisfied() const {
    for (const auto& row : rows) {
        if (!row.satisfied) return false;
    }
    return true;
}

ReversibleBoundReport reversible_bias_bound(const LsaProblem& problem, const FiniteChain& chain,
                                            const BiasExpansion& expansion, std::size_t i_max) {
    require_compatible(problem, chain);
    const SpectralReport spectral = spectral_report(chain);
    if (!spectral.reversible) {
        throw Error(ErrorCode::NotReversible,
                    "detailed balance violated by " +
                        std::to_string(spectral.detailed_balance_violation));
    }
    const std::size_t d = problem.d;
    const Vector& pi = chain.stationary();
    const Matrix D = lift_d(problem).M;
    const Matrix Pi = lift_pi(chain, d).M;
    const Eigen::Index N = D.rows();

    ReversibleBoundReport r;
    r.gap = spectral.gap;
    const double first = weighted_norm(expansion.Dbar.M, pi, d) *
                         weighted_norm(stacked_drift(problem), pi, d);
    const double second =
        weighted_norm(Matrix(D * (Matrix::Identity(N, N) - Pi * expansion.Dbar.M)), pi, d);
    r.C = std::max(first, second);

    const double ratio = r.gap > 0.0 ? r.C * (1.0 - r.gap) / r.gap
                                     : std::numeric_limits<double>::infinity();
    BiasExpansion longer;
    const BiasExpansion* ex = &expansion;
    if (expansion.B.size() < i_max) {
        longer = bias_expansion(problem, chain, i_max);
        ex = &longer;
    }
    for (std::size_t i = 1; i <= i_max; ++i) {
        ReversibleBoundRow row;
        row.i = i;
        row.norm_B = ex->B[i - 1].norm();
        row.bound = std::pow(ratio, static_cast<double>(i));
        row.satisfied = row.norm_B <= row.bound + kBoundSlack;
        r.rows.push_back(row);
    }
    return r;
}

}  // namespace mlsa
