#pragma once

#include "mlsa/chain.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mlsa {

/// LSA instance theta_{k+1} = theta_k + alpha (A(x_k) theta_k + b(x_k)) over a
/// finite chain, with its stationary averages and target theta*.
struct LsaProblem {
    std::size_t n = 0;  // states
    std::size_t d = 0;  // iterate dimension
    std::vector<Matrix> A;
    std::vector<Vector> b;
    Matrix Abar;
    Vector bbar;
    Vector theta_star;
    double A_max = 0.0;
    double b_max = 0.0;
    double scale = 1.0;  // divisor applied to every A(x) by normalization
    bool exceeds_unit_bound = false;  // A_max > 1 (only without normalization)
    std::string label;
};

/// Populates averages and theta* = -Abar^{-1} bbar. With `normalize`, all
/// A(x) are divided by max_x ||A(x)|| first.
/// Throws SingularMeanMatrix (rcond < 1e-14) or NotHurwitz.
LsaProblem build_problem(const FiniteChain& chain, std::vector<Matrix> A, std::vector<Vector> b,
                         bool normalize, std::string label = {});

/// Largest real part over the eigenvalues of M.
double spectral_abscissa(const Matrix& M);

/// Solution of M^T G + G M = -I through the d^2 x d^2 Kronecker system.
Matrix solve_lyapunov(const Matrix& M);

struct LyapunovCert {
    Matrix Gamma;
    double gamma_min = 0.0;
    double gamma_max = 0.0;
    double kappa = 0.0;     // 720 gamma_max^2 / gamma_min * s_min(Abar)^-2 * b_max^2
    double residual = 0.0;  // ||Abar^T Gamma + Gamma Abar + I||
};

LyapunovCert lyapunov_certificate(const LsaProblem& problem);

struct AdmissibilityReport {
    std::size_t tau_alpha = 0;
    double product = 0.0;  // alpha * tau_alpha
    double bound = 0.0;    // 0.05 / (95 gamma_max)
    bool admissible = false;
};

/// Checks alpha * tau_alpha < 0.05 / (95 gamma_max) with tau computed at
/// eps = alpha. For alpha >= 1 the mixing tolerance is clamped just below 1.
AdmissibilityReport stepsize_admissible(const LsaProblem& problem, const FiniteChain& chain,
                                        double alpha, const LyapunovCert& cert);
AdmissibilityReport stepsize_admissible(const LsaProblem& problem, const FiniteChain& chain,
                                        double alpha);

/// Largest alpha on the grid alpha_hi * shrink^j (j >= 0) that passes
/// stepsize_admissible.
double largest_admissible_stepsize(const LsaProblem& problem, const FiniteChain& chain,
                                   double alpha_hi = 1e-2, double shrink = 0.8);

/// Random instance: ergodic chain, Hurwitz mean matrix from standard normals
/// (shifted by -2 max Re(lambda) I when needed), noise matrices uniform on
/// [-1,1] balanced so that sum_x pi_x E(x) = 0, joint spectral normalization,
/// offsets uniform on [-1,1]. Bit-deterministic in (n, d, seed).
std::pair<FiniteChain, LsaProblem> random_problem(std::size_t n, std::size_t d, std::uint64_t seed);

}  // namespace mlsa
