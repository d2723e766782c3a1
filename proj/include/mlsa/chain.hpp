#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mlsa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kRowSumTolerance = 1e-12;
inline constexpr double kStationaryTolerance = 1e-10;
inline constexpr double kDetailedBalanceTolerance = 1e-10;
inline constexpr std::size_t kDefaultMixingCap = 1'000'000;

/// Structural facts about the directed graph of positive kernel entries.
struct ChainStructure {
    std::size_t recurrent_classes = 0;  // closed communicating classes
    bool irreducible = false;
    std::size_t period = 0;             // of the (unique) recurrent class; 0 if not unique
    std::vector<bool> recurrent;        // membership in the unique recurrent class
    bool aperiodic() const noexcept { return period == 1; }
};

ChainStructure analyze_structure(const Matrix& P);

struct StationaryDistribution {
    Vector pi;
    double residual = 0.0;  // ||pi P - pi||_inf
};

/// Unique stationary distribution of a row-stochastic kernel.
/// Throws NonUniqueStationary when more than one recurrent class exists.
StationaryDistribution stationary_distribution(const Matrix& P);

/// Finite-state Markov chain: validated kernel plus stationary distribution.
/// Immutable after construction.
class FiniteChain {
public:
    /// Validates P (row-stochastic, entries in [0,1]) and solves for pi.
    static FiniteChain from_kernel(Matrix P, std::string label = {});

    std::size_t size() const noexcept { return static_cast<std::size_t>(kernel_.rows()); }
    const Matrix& kernel() const noexcept { return kernel_; }
    const Vector& stationary() const noexcept { return pi_; }
    double stationary_residual() const noexcept { return residual_; }
    const ChainStructure& structure() const noexcept { return structure_; }
    bool is_ergodic() const noexcept { return structure_.irreducible && structure_.aperiodic(); }
    const std::string& label() const noexcept { return label_; }

    /// Cumulative row tables for inverse-CDF sampling of x_{k+1} given x_k.
    std::vector<double> cumulative_rows() const;

private:
    FiniteChain() = default;

    Matrix kernel_;
    Vector pi_;
    double residual_ = 0.0;
    ChainStructure structure_;
    std::string label_;
};

/// Time-reversed kernel P*[x][y] = pi_y P[y][x] / pi_x.
Matrix time_reversal(const FiniteChain& chain);

struct SpectralReport {
    double gap = 0.0;   // absolute spectral gap
    double slem = 0.0;  // second-largest eigenvalue modulus
    bool reversible = false;
    double detailed_balance_violation = 0.0;  // max_{x,y} |pi_x P_xy - pi_y P_yx|
    std::vector<std::complex<double>> eigenvalues;  // sorted by decreasing modulus
};

SpectralReport spectral_report(const FiniteChain& chain);

/// Eigenvalues of a reversible kernel from the symmetrized matrix
/// D^{1/2} P D^{-1/2}; requires strictly positive pi.
Vector reversible_eigenvalues(const FiniteChain& chain);

/// (A,b)-mixing time: smallest tau >= 1 such that for every start state and
/// every k >= tau the conditional means of A(x_k) and b(x_k) sit within
/// eps * A_max (spectral norm) and eps * b_max (Euclidean norm) of their
/// stationary values.
///
/// The worst-case deviation over start states is nonincreasing in k (each
/// row of P is a convex combination), so the first k meeting both bounds is
/// the answer. Throws MixingTimeout past `k_max`.
std::size_t mixing_time(const FiniteChain& chain, std::span<const Matrix> A,
                        std::span<const Vector> b, double eps,
                        std::size_t k_max = kDefaultMixingCap);

/// P^(beta) = beta P + (1 - beta) 1 pi^T.
FiniteChain interpolate_kernel(const FiniteChain& chain, double beta);

/// Uniform [0,1] entries, rows normalized, redrawn until irreducible and
/// aperiodic. Bit-deterministic in (n, seed).
FiniteChain random_ergodic_chain(std::size_t n, std::uint64_t seed);

}  // namespace mlsa
