#pragma once

#include "mlsa/engine.hpp"

#include <span>
#include <vector>

namespace mlsa {

inline constexpr double kStepsizeGapTolerance = 1e-10;

/// Weights h with sum h_i = 1 and sum h_i alpha_i^t = 0 for t = 1..m-1.
struct RrScheme {
    std::vector<double> alphas;
    std::vector<double> h;
    double sum_abs_h = 0.0;          // variance inflation indicator
    double cross_check_error = 0.0;  // max |h - Vandermonde solve|
};

/// Lagrange-at-zero weights h_i = prod_{j != i} (-alpha_j) / (alpha_i - alpha_j).
/// Throws DegenerateScheme when two stepsizes are within a relative gap of 1e-10.
RrScheme rr_coefficients(std::span<const double> alphas);

/// max_t |sum_i h_i alpha_i^t - [t == 0]| / max_i alpha_i^t over t = 0..m-1.
double rr_residual(const RrScheme& scheme);

/// sum_i h_i v_i.
Vector rr_combine(std::span<const Vector> values, const RrScheme& scheme);

struct ExtrapolatedSummary {
    std::vector<std::size_t> k;
    std::vector<Vector> theta;  // sum_i h_i theta_bar^(alpha_i)
    std::vector<double> err_rr;
    RrScheme scheme;
    std::uint64_t seed = 0;
};

/// Combines tail averages checkpoint by checkpoint. Summaries must share
/// checkpoints and seed, and their stepsizes must match the scheme in order
/// (AlignmentError otherwise).
ExtrapolatedSummary rr_extrapolate(std::span<const TrajectorySummary> summaries,
                                   const RrScheme& scheme, const Vector& theta_star);

}  // namespace mlsa
