#pragma once

#include "mlsa/engine.hpp"
#include "mlsa/extrapolation.hpp"
#include "mlsa/rng.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mlsa {

inline constexpr std::size_t kMhBurnIn = 10'000;

/// Proposal density on [-1, 1): 1/4 on [-1, 0), 3/4 on [0, 1).
double proposal_density(double v) noexcept;

/// Inverse CDF of the proposal density.
double proposal_inverse_cdf(double u) noexcept;

using Point2 = std::array<double, 2>;

/// min{ q(g1) q(g2) / (q(h1) q(h2)), 1 }: independence Metropolis-Hastings
/// acceptance for the uniform target on [-1, 1]^2.
double acceptance_probability(const Point2& current, const Point2& proposal) noexcept;

/// Covariate chain g_t. Every step consumes exactly three uniforms (two
/// proposal coordinates and one acceptance draw).
class MhSampler {
public:
    /// g_0 uniform on [-1,1]^2, then `burn_in` steps.
    explicit MhSampler(std::uint64_t seed, std::size_t burn_in = kMhBurnIn);

    const Point2& state() const noexcept { return g_; }
    const Point2& step() noexcept;
    std::uint64_t accepted() const noexcept { return accepted_; }
    std::uint64_t steps() const noexcept { return steps_; }

private:
    RandomStream rng_;
    Point2 g_{};
    std::uint64_t accepted_ = 0;
    std::uint64_t steps_ = 0;
};

enum class NoiseModel {
    Zero,            // n_k = 0
    IidUniform,      // n_k uniform on [-1, 1], independent of the covariates
    SignCorrelated,  // n_k = sign(g_k(1) + g_k(2)), sign(0) = 0
};

std::string to_string(NoiseModel noise);

/// Minimizer of the stationary least-squares objective E[(g^T theta - y)^2].
/// Under the uniform covariate law E[g g^T] = I/3 and
/// E[g sign(g1 + g2)] = (1/3, 1/3), so the sign-correlated target is
/// theta_reg + (1, 1).
Vector regression_target(NoiseModel noise, const Vector& theta_reg);

struct ReferenceEstimate {
    Vector theta;
    Vector se;  // batch-means standard error, componentwise
    std::size_t samples = 0;
};

/// Normal-equation solve over the empirical covariate law of a long MH run.
ReferenceEstimate reference_target(NoiseModel noise, const Vector& theta_reg, std::size_t samples,
                                   std::uint64_t seed, std::size_t batches = 100);

struct RegressionConfig {
    NoiseModel noise = NoiseModel::IidUniform;
    Vector theta_reg = Vector::Zero(2);
    std::size_t K = 0;
    std::uint64_t seed = 0;
    K0Policy k0_policy = K0Policy::Half;
    std::size_t k0 = 0;
    Vector theta0 = Vector::Zero(2);
    double decay_power = 0.0;  // alpha_k = alpha / (k + 1)^p when > 0
    std::vector<std::size_t> checkpoints;  // log_checkpoints(K) when empty
};

/// SGD on the regression stream executed as LSA with A = -g g^T, b = g y,
/// y = <g, theta_reg> + n. Errors are measured against regression_target.
TrajectorySummary regression_run(const RegressionConfig& config, double alpha);

/// All stepsizes consume one shared (g, n) stream.
std::vector<TrajectorySummary> regression_multi(const RegressionConfig& config,
                                                std::span<const double> alphas);

struct RegressionRr {
    std::vector<TrajectorySummary> runs;
    ExtrapolatedSummary rr;
};

RegressionRr rr_regression(const RegressionConfig& config, std::span<const double> alphas);

/// One-sample Kolmogorov-Smirnov statistic against Uniform[lo, hi].
double ks_uniform(std::vector<double> samples, double lo, double hi);

/// Asymptotic critical value sqrt(-log(level / 2) / 2) / sqrt(n).
double ks_critical(std::size_t n, double level);

}  // namespace mlsa
