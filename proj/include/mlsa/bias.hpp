#pragma once

#include "mlsa/problem.hpp"

#include <vector>

namespace mlsa {

/// Operators on stacked functions f: X -> R^d, realized as (n d) x (n d)
/// matrices; block x of a stacked vector holds f(x).
enum class OperatorKind { Pstar, Pi, D, Dbar, Xi, Composite };

struct LiftedOperator {
    Matrix M;
    OperatorKind kind = OperatorKind::Composite;
};

LiftedOperator lift_pstar(const FiniteChain& chain, std::size_t d);  // P* kron I
LiftedOperator lift_pi(const FiniteChain& chain, std::size_t d);     // 1 pi^T kron I
LiftedOperator lift_d(const LsaProblem& problem);                    // blockdiag A(x)
LiftedOperator lift_dbar(const LsaProblem& problem);                 // blockdiag Abar^-1 A(x)

/// sum_x pi_x v(x) for a stacked vector v.
Vector pi_apply(const Vector& stacked, const Vector& pi, std::size_t d);

/// Operator norm on L2(pi): spectral norm of W M W^-1, W = diag(sqrt(pi)) kron I.
double weighted_norm(const Matrix& M, const Vector& pi, std::size_t d);

/// L2(pi) norm of a stacked vector.
double weighted_norm(const Vector& stacked, const Vector& pi, std::size_t d);

/// Stacked A(x) theta* + b(x).
Vector stacked_drift(const LsaProblem& problem);

struct StationarySolution {
    Vector z;     // block x: E[theta_inf | x_inf = x]
    Vector mean;  // pi z
    Vector bias;  // pi z - theta*
    double residual = 0.0;
    double rcond = 0.0;

    /// delta(x) = z(x) - pi z, stacked.
    Vector delta() const;
};

inline constexpr double kOracleRcond = 1e-13;

/// Solves (I - P*(I + alpha D)) z = alpha P* b with one dense LU.
/// Throws OracleSingular when the reciprocal condition estimate is < 1e-13.
StationarySolution exact_stationary_mean(const LsaProblem& problem, const FiniteChain& chain,
                                         double alpha);

struct BiasExpansion {
    Vector Upsilon;
    LiftedOperator Xi;
    LiftedOperator Dbar;
    std::vector<Vector> B;  // B[0] is the first-order coefficient
    double xi_norm = 0.0;
    Vector pi;
    std::size_t d = 0;

    /// sum_{i <= m} alpha^i B^(i) with m <= B.size().
    Vector truncated_bias(double alpha, std::size_t m) const;
};

BiasExpansion bias_expansion(const LsaProblem& problem, const FiniteChain& chain, std::size_t m);

/// theta* - alpha pi Dbar (I - alpha Xi)^-1 Upsilon. Throws SeriesDivergent
/// when alpha >= 1 / xi_norm unless `allow_outside`.
Vector infinite_series_mean(const BiasExpansion& expansion, const LsaProblem& problem,
                            double alpha, bool allow_outside = false);

struct ZeroBiasReport {
    bool holds = false;
    double max_violation = 0.0;
    std::vector<double> violation;  // ||g(x)|| per state
};

/// g(x) = sum_s P*[x][s] (A(s) theta* + b(s)); holds iff max_x ||g(x)|| <= tol.
ZeroBiasReport zero_bias_condition(const LsaProblem& problem, const FiniteChain& chain, double tol);

struct ReversibleBoundRow {
    std::size_t i = 0;
    double norm_B = 0.0;
    double bound = 0.0;
    bool satisfied = false;
};

struct ReversibleBoundReport {
    double C = 0.0;
    double gap = 0.0;
    std::vector<ReversibleBoundRow> rows;
    bool all_satisfied() const;
};

inline constexpr double kBoundSlack = 1e-12;

/// ||B^(i)|| <= (C (1 - gap) / gap)^i, C = max{ ||Dbar|| ||A theta* + b||,
/// ||D (I - Pi Dbar)|| } in L2(pi) norms. Throws NotReversible.
ReversibleBoundReport reversible_bias_bound(const LsaProblem& problem, const FiniteChain& chain,
                                            const BiasExpansion& expansion, std::size_t i_max);

}  // namespace mlsa
