#include "mlsa/extrapolation.hpp"

#include "mlsa/error.hpp"

#include <algorithm>
#include <cmath>

namespace mlsa {

RrScheme rr_coefficients(std::span<const double> alphas) {
    const std::size_t m = alphas.size();
    if (m == 0) throw Error(ErrorCode::InvalidParameter, "need at least one stepsize");
    for (double a : alphas) {
        if (!(a > 0.0) || !std::isfinite(a)) {
            throw Error(ErrorCode::InvalidParameter, "stepsizes must be positive and finite");
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double gap = std::abs(alphas[i] - alphas[j]) / std::max(alphas[i], alphas[j]);
            if (gap <= kStepsizeGapTolerance) {
                throw Error(ErrorCode::DegenerateScheme,
                            "stepsizes " + std::to_string(i) + " and " + std::to_string(j) +
                                " coincide");
            }
        }
    }

    RrScheme s;
    s.alphas.assign(alphas.begin(), alphas.end());
    s.h.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        double h = 1.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (j != i) h *= -alphas[j] / (alphas[i] - alphas[j]);
        }
        s.h[i] = h;
        s.sum_abs_h += std::abs(h);
    }

    // Row t of V holds alpha_i^t, scaled by max alpha^t for conditioning.
    const double amax = *std::max_element(alphas.begin(), alphas.end());
    Matrix V(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t t = 0; t < m; ++t) {
        for (std::size_t i = 0; i < m; ++i) {
            V(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) =
                std::pow(alphas[i] / amax, static_cast<double>(t));
        }
    }
    Vector e = Vector::Zero(static_cast<Eigen::Index>(m));
    e(0) = 1.0;
    const Vector direct = V.fullPivLu().solve(e);
    for (std::size_t i = 0; i < m; ++i) {
        s.cross_check_error =
            std::max(s.cross_check_error, std::abs(direct(static_cast<Eigen::Index>(i)) - s.h[i]));
    }
    return s;
}

double rr_residual(const RrScheme& scheme) {
    const std::size_t m = scheme.alphas.size();
    const double amax = *std::max_element(scheme.alphas.begin(), scheme.alphas.end());
    double worst = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            acc += scheme.h[i] * std::pow(scheme.alphas[i] / amax, static_cast<double>(t));
        }
        worst = std::max(worst, std::abs(acc - (t == 0 ? 1.0 : 0.0)));
    }
    return worst;
}

Vector rr_combine(std::span<const Vector> values, const RrScheme& scheme) {
    if (values.size() != scheme.h.size()) {
        throw Error(ErrorCode::AlignmentError, "one value per stepsize required");
    }
    Vector out = Vector::Zero(values.front().size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i].size() != out.size()) {
            throw Error(ErrorCode::AlignmentError, "dimension mismatch");
        }
        out += scheme.h[i] * values[i];
    }
    return out;
}

ExtrapolatedSummary rr_extrapolate(std::span<const TrajectorySummary> summaries,
                                   const RrScheme& scheme, const Vector& theta_star) {
    if (summaries.size() != scheme.alphas.size() || summaries.empty()) {
        throw Error(ErrorCode::AlignmentError, "one summary per scheme stepsize required");
    }
    const auto& ref = summaries.front();
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        const auto& s = summaries[i];
        if (s.k != ref.k) throw Error(ErrorCode::AlignmentError, "checkpoint mismatch");
        if (s.seed != ref.seed) throw Error(ErrorCode::AlignmentError, "seed mismatch");
        if (s.alpha != scheme.alphas[i]) {
            throw Error(ErrorCode::AlignmentError,
                        "summary " + std::to_string(i) + " stepsize does not match the scheme");
        }
    }

    ExtrapolatedSummary out;
    out.k = ref.k;
    out.scheme = scheme;
    out.seed = ref.seed;
    std::vector<Vector> values(summaries.size());
    for (std::size_t c = 0; c < ref.k.size(); ++c) {
        for (std::size_t i = 0; i < summaries.size(); ++i) values[i] = summaries[i].theta_bar[c];
        out.theta.push_back(rr_combine(values, scheme));
        out.err_rr.push_back((out.theta.back() - theta_star).norm());
    }
    return out;
}

}  // namespace mlsa
