#pragma once

#include "mlsa/problem.hpp"
#include "mlsa/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mlsa {

inline constexpr double kDivergenceThreshold = 1e12;

/// Burn-in rule for tail averages: `Half` averages over [floor(k/2), k) at
/// checkpoint k, `Fixed` over [k0, k).
enum class K0Policy { Half, Fixed };

std::string to_string(K0Policy policy);

/// About `per_decade` log-spaced indices in [1, K], always including K.
std::vector<std::size_t> log_checkpoints(std::size_t K, std::size_t per_decade = 50);

struct RunConfig {
    double alpha = 0.0;
    std::size_t K = 0;
    K0Policy k0_policy = K0Policy::Half;
    std::size_t k0 = 0;  // used by K0Policy::Fixed
    std::uint64_t seed = 0;
    std::optional<Vector> theta0;            // zero vector when empty
    std::vector<std::size_t> checkpoints;    // log_checkpoints(K) when empty
    std::optional<std::size_t> x0;           // fixed start state (non-stationary start)
    double decay_power = 0.0;                // alpha_k = alpha / (k + 1)^p when > 0
};

struct TrajectorySummary {
    std::vector<std::size_t> k;
    std::vector<std::size_t> k0;  // first index of each tail-average window
    std::vector<Vector> theta;
    std::vector<Vector> theta_bar;
    std::vector<double> err_raw;
    std::vector<double> err_ta;  // NaN where the averaging window is empty

    std::uint64_t seed = 0;
    double alpha = 0.0;
    double decay_power = 0.0;
    K0Policy k0_policy = K0Policy::Half;
    std::size_t fixed_k0 = 0;
    bool stationary_start = true;
    bool diverged = false;
    std::size_t diverged_at = 0;
    std::string notes;
};

/// Inverse-CDF sampler for one path of a finite chain. The first draw of the
/// stream picks x_0 from pi unless a start state is given.
class ChainSampler {
public:
    ChainSampler(const FiniteChain& chain, std::uint64_t seed, std::uint64_t stream_id,
                 std::optional<std::size_t> x0 = std::nullopt);

    std::size_t state() const noexcept { return x_; }
    /// Moves to x_{k+1} ~ P(x_k, .) and returns it.
    std::size_t step() noexcept;

private:
    std::vector<double> cdf_;
    std::size_t n_;
    std::size_t x_;
    RandomStream rng_;
};

/// Raw LSA trajectory with x_0 ~ pi (or the configured x_0) and streaming tail
/// averages. Throws DivergedError once ||theta_k|| exceeds 1e12.
TrajectorySummary simulate(const LsaProblem& problem, const FiniteChain& chain,
                           const RunConfig& config);

/// One data stream shared by every stepsize. Workers each regenerate the
/// stream, so results do not depend on `jobs`. A diverging stepsize is
/// flagged in its own summary and does not stop the others.
std::vector<TrajectorySummary> simulate_multi(const LsaProblem& problem, const FiniteChain& chain,
                                              std::span<const double> alphas,
                                              const RunConfig& base, std::size_t jobs = 1);

/// Compensated (Neumaier) running sum.
class CompensatedSum {
public:
    void add(double v) noexcept;
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Mean and standard error over seeds, per checkpoint.
struct SeedAggregate {
    std::vector<std::size_t> k;
    std::size_t seeds = 0;
    std::vector<double> err_raw, err_ta;          // means
    std::vector<double> mse_raw, mse_raw_se;      // E||theta_k - theta*||^2
    std::vector<Vector> theta_bar, theta_bar_se;  // componentwise
    std::vector<std::uint64_t> seed_list;
};

SeedAggregate aggregate(std::span<const TrajectorySummary> runs);

/// Runs seeds base.seed, base.seed + 1, ... and aggregates in seed order.
SeedAggregate run_seeds(const LsaProblem& problem, const FiniteChain& chain,
                        const RunConfig& base, std::size_t seeds, std::size_t jobs = 1);

enum class CouplingInit { Fixed, Isotropic };

struct CouplingConfig {
    double alpha = 0.0;
    std::size_t K = 0;
    std::uint64_t seed = 0;
    std::size_t pairs = 1;
    CouplingInit init = CouplingInit::Fixed;
    Vector theta0_a;  // Fixed: omega_0 = theta0_a - theta0_b
    Vector theta0_b;
    double radius = 1.0;  // Isotropic: omega_0 uniform on the sphere of this radius
    std::vector<std::size_t> checkpoints;  // log_checkpoints(K) when empty
    std::size_t fit_from = 0;              // fit uses checkpoints k >= fit_from
};

struct CouplingSummary {
    std::vector<std::size_t> k;
    std::vector<double> m;  // mean ||omega_k||^2 over pairs; m[0] is k = 0
    double m0 = 0.0;
    double rho_hat = 1.0;  // per-step rate of m_k from a log-linear fit
    double rho_se = 0.0;
    std::size_t fit_points = 0;
};

/// Pairs of iterates driven by one shared x-stream each; omega_k follows the
/// b-free recursion omega_{k+1} = (I + alpha A(x_k)) omega_k.
CouplingSummary simulate_coupled(const LsaProblem& problem, const FiniteChain& chain,
                                 const CouplingConfig& config);

struct MseBoundRow {
    std::size_t k = 0;
    double mse = 0.0;
    double se = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct MseBoundReport {
    std::size_t tau = 0;
    std::vector<MseBoundRow> rows;
    bool all_pass() const;
};

/// Compares a Monte Carlo MSE with
/// 10 (g_max / g_min) (1 - 0.9 alpha / g_max)^k (||theta_0 - theta*||^2 + s_min^-2 b_max^2)
///   + alpha tau kappa
/// at every checkpoint k >= tau.
MseBoundReport mse_bound_check(const LsaProblem& problem, const FiniteChain& chain,
                               const LyapunovCert& cert, double alpha, const SeedAggregate& mc,
                               const Vector& theta0);

/// Median of `values` over checkpoints in the last half-decade [K / sqrt(10), K].
double plateau(std::span<const std::size_t> k, std::span<const double> values);

/// Runs f(i) for i in [0, count) on at most `jobs` threads.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& f);

}  // namespace mlsa
