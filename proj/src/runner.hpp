#pragma once

#include "mlsa/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

// Lockstep LSA runner shared by the finite-chain engine and the regression
// module. A Source yields (A(x_k), b(x_k)) as raw row-major pointers through
// next(A, b) and then moves to x_{k+1}.
namespace mlsa::detail {

struct Track {
    double alpha = 0.0;
    double decay_power = 0.0;
    Vector theta0;
};

struct Plan {
    std::size_t K = 0;
    std::vector<std::size_t> checkpoints;
    K0Policy policy = K0Policy::Half;
    std::size_t fixed_k0 = 0;
    Vector theta_star;
    std::uint64_t seed = 0;
    bool stationary_start = true;
};

inline std::size_t window_start(const Plan& plan, std::size_t k) {
    return plan.policy == K0Policy::Half ? k / 2 : std::min(plan.fixed_k0, k);
}

void validate_plan(const Plan& plan);

template <class Source>
std::vector<TrajectorySummary> run_lockstep(Source& source, std::size_t d,
                                            std::span<const Track> tracks, const Plan& plan) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    const auto& cps = plan.checkpoints;
    std::vector<std::size_t> marks;
    marks.reserve(2 * cps.size());
    for (std::size_t k : cps) {
        marks.push_back(k);
        marks.push_back(window_start(plan, k));
    }
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

    const std::size_t T = tracks.size();
    const double limit_sq = kDivergenceThreshold * kDivergenceThreshold;

    struct State {
        std::vector<double> theta, next, sum, comp;
        std::vector<double> prefix;  // marks.size() x d
        std::vector<double> saved;   // cps.size() x d
        bool diverged = false;
        std::size_t diverged_at = 0;
    };
    std::vector<State> st(T);
    for (std::size_t t = 0; t < T; ++t) {
        auto& s = st[t];
        s.theta.assign(tracks[t].theta0.data(), tracks[t].theta0.data() + d);
        s.next.assign(d, 0.0);
        s.sum.assign(d, 0.0);
        s.comp.assign(d, 0.0);
        s.prefix.assign(marks.size() * d, nan);
        s.saved.assign(cps.size() * d, nan);
    }

    std::size_t next_mark = 0, next_cp = 0;
    auto record = [&](std::size_t index) {
        while (next_mark < marks.size() && marks[next_mark] == index) {
            for (auto& s : st) {
                if (s.diverged) continue;
                for (std::size_t i = 0; i < d; ++i) s.prefix[next_mark * d + i] = s.sum[i] + s.comp[i];
            }
            ++next_mark;
        }
        if (next_cp < cps.size() && cps[next_cp] == index) {
            for (auto& s : st) {
                if (s.diverged) continue;
                std::copy(s.theta.begin(), s.theta.end(), s.saved.begin() + static_cast<std::ptrdiff_t>(next_cp * d));
            }
            ++next_cp;
        }
    };

    record(0);
    std::size_t alive = T;
    const double* A = nullptr;
    const double* b = nullptr;
    for (std::size_t k = 0; k < plan.K && alive > 0; ++k) {
        source.next(A, b);
        for (std::size_t t = 0; t < T; ++t) {
            auto& s = st[t];
            if (s.diverged) continue;
            const double step = tracks[t].decay_power > 0.0
                                    ? tracks[t].alpha / std::pow(static_cast<double>(k + 1),
                                                                 tracks[t].decay_power)
                                    : tracks[t].alpha;
            double norm_sq = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double v = s.theta[i];
                const double total = s.sum[i] + v;
                s.comp[i] += std::abs(s.sum[i]) >= std::abs(v) ? (s.sum[i] - total) + v
                                                                : (v - total) + s.sum[i];
                s.sum[i] = total;
                double drift = b[i];
                const double* row = A + i * d;
                for (std::size_t j = 0; j < d; ++j) drift += row[j] * s.theta[j];
                s.next[i] = v + step * drift;
                norm_sq += s.next[i] * s.next[i];
            }
            s.theta.swap(s.next);
            if (!(norm_sq <= limit_sq)) {
                s.diverged = true;
                s.diverged_at = k + 1;
                --alive;
            }
        }
        record(k + 1);
    }

    std::vector<TrajectorySummary> out(T);
    for (std::size_t t = 0; t < T; ++t) {
        const auto& s = st[t];
        auto& sum = out[t];
        sum.seed = plan.seed;
        sum.alpha = tracks[t].alpha;
        sum.decay_power = tracks[t].decay_power;
        sum.k0_policy = plan.policy;
        sum.fixed_k0 = plan.fixed_k0;
        sum.stationary_start = plan.stationary_start;
        sum.diverged = s.diverged;
        sum.diverged_at = s.diverged_at;
        sum.notes = plan.policy == K0Policy::Half
                        ? "tail average over [floor(k/2), k) from exact prefix sums"
                        : "tail average over [k0, k) from exact prefix sums";
        for (std::size_t c = 0; c < cps.size(); ++c) {
            const std::size_t k = cps[c];
            const std::size_t start = window_start(plan, k);
            const auto mk = static_cast<std::size_t>(
                std::lower_bound(marks.begin(), marks.end(), k) - marks.begin());
            const auto ms = static_cast<std::size_t>(
                std::lower_bound(marks.begin(), marks.end(), start) - marks.begin());
            Vector theta(static_cast<Eigen::Index>(d)), bar(static_cast<Eigen::Index>(d));
            for (std::size_t i = 0; i < d; ++i) {
                theta(static_cast<Eigen::Index>(i)) = s.saved[c * d + i];
                bar(static_cast<Eigen::Index>(i)) =
                    k > start ? (s.prefix[mk * d + i] - s.prefix[ms * d + i]) /
                                    static_cast<double>(k - start)
                              : nan;
            }
            sum.k.push_back(k);
            sum.k0.push_back(start);
            sum.err_raw.push_back((theta - plan.theta_star).norm());
            sum.err_ta.push_back((bar - plan.theta_star).norm());
            sum.theta.push_back(std::move(theta));
            sum.theta_bar.push_back(std::move(bar));
        }
    }
    return out;
}

/// Finite-chain data source over flat copies of A(x) and b(x).
class ChainSource {
public:
    ChainSource(const LsaProblem& problem, const FiniteChain& chain, std::uint64_t seed,
                std::uint64_t stream_id, std::optional<std::size_t> x0);

    void next(const double*& A, const double*& b) noexcept {
        const std::size_t x = sampler_.state();
        A = A_.data() + x * dd_;
        b = b_.data() + x * d_;
        sampler_.step();
    }

private:
    std::vector<double> A_, b_;
    std::size_t d_, dd_;
    ChainSampler sampler_;
};

}  // namespace mlsa::detail
