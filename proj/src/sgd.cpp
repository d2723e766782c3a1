#include "mlsa/sgd.hpp"

#include "mlsa/error.hpp"
#include "runner.hpp"
#include "streams.hpp"

#include <algorithm>
#include <cmath>

namespace mlsa {

double proposal_density(double v) noexcept { return v < 0.0 ? 0.25 : 0.75; }

double proposal_inverse_cdf(double u) noexcept {
    return u < 0.25 ? 4.0 * u - 1.0 : (u - 0.25) * (4.0 / 3.0);
}

double acceptance_probability(const Point2& current, const Point2& proposal) noexcept {
    const double ratio = proposal_density(current[0]) * proposal_density(current[1]) /
                         (proposal_density(proposal[0]) * proposal_density(proposal[1]));
    return std::min(ratio, 1.0);
}

MhSampler::MhSampler(std::uint64_t seed, std::size_t burn_in)
    : rng_(seed, streams::kCovariates) {
    g_ = {rng_.uniform(-1.0, 1.0), rng_.uniform(-1.0, 1.0)};
    for (std::size_t i = 0; i < burn_in; ++i) step();
    accepted_ = 0;
    steps_ = 0;
}

const Point2& MhSampler::step() noexcept {
    const Point2 h{proposal_inverse_cdf(rng_.uniform()), proposal_inverse_cdf(rng_.uniform())};
    const double u = rng_.uniform();
    if (u < acceptance_probability(g_, h)) {
        g_ = h;
        ++accepted_;
    }
    ++steps_;
    return g_;
}

std::string to_string(NoiseModel noise) {
    switch (noise) {
        case NoiseModel::Zero: return "zero";
        case NoiseModel::IidUniform: return "iid-uniform";
        case NoiseModel::SignCorrelated: return "sign-correlated";
    }
    return "unknown";
}

namespace {

double sign(double v) noexcept { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void require_plane(const Vector& v, const char* what) {
    if (v.size() != 2) throw Error(ErrorCode::InvalidParameter, std::string(what) + " must be 2-dimensional");
}

class RegressionSource {
public:
    RegressionSource(NoiseModel noise, const Vector& theta_reg, std::uint64_t seed)
        : noise_(noise), theta_reg_{theta_reg(0), theta_reg(1)}, sampler_(seed),
          noise_rng_(seed, streams::kRegressionNoise) {}

    double noise(const Point2& g) noexcept {
        switch (noise_) {
            case NoiseModel::Zero: return 0.0;
            case NoiseModel::IidUniform: return noise_rng_.uniform(-1.0, 1.0);
            case NoiseModel::SignCorrelated: return sign(g[0] + g[1]);
        }
        return 0.0;
    }

    void next(const double*& A, const double*& b) noexcept {
        const Point2& g = sampler_.state();
        const double y = g[0] * theta_reg_[0] + g[1] * theta_reg_[1] + noise(g);
        A_ = {-g[0] * g[0], -g[0] * g[1], -g[1] * g[0], -g[1] * g[1]};
        b_ = {g[0] * y, g[1] * y};
        A = A_.data();
        b = b_.data();
        sampler_.step();
    }

    const Point2& covariate() const noexcept { return sampler_.state(); }
    void advance() noexcept { sampler_.step(); }

private:
    NoiseModel noise_;
    Point2 theta_reg_;
    MhSampler sampler_;
    RandomStream noise_rng_;
    std::array<double, 4> A_{};
    std::array<double, 2> b_{};
};

detail::Plan regression_plan(const RegressionConfig& c) {
    require_plane(c.theta_reg, "theta_reg");
    require_plane(c.theta0, "theta0");
    detail::Plan plan;
    plan.K = c.K;
    plan.checkpoints = c.checkpoints.empty() ? log_checkpoints(c.K) : c.checkpoints;
    plan.policy = c.k0_policy;
    plan.fixed_k0 = c.k0;
    plan.theta_star = regression_target(c.noise, c.theta_reg);
    plan.seed = c.seed;
    plan.stationary_start = false;
    detail::validate_plan(plan);
    return plan;
}

std::string regression_notes(const RegressionConfig& c) {
    std::string s = "noise=" + to_string(c.noise) + "; covariates: MH burn-in " +
                    std::to_string(kMhBurnIn) + "; target: population least-squares minimizer";
    if (c.noise == NoiseModel::SignCorrelated) s += " theta_reg + (1, 1)";
    return s;
}

}  // namespace

Vector regression_target(NoiseModel noise, const Vector& theta_reg) {
    require_plane(theta_reg, "theta_reg");
    if (noise == NoiseModel::SignCorrelated) return theta_reg + Vector::Ones(2);
    return theta_reg;
}

ReferenceEstimate reference_target(NoiseModel noise, const Vector& theta_reg, std::size_t samples,
                                   std::uint64_t seed, std::size_t batches) {
    require_plane(theta_reg, "theta_reg");
    if (batches < 2 || samples < batches) {
        throw Error(ErrorCode::InvalidParameter, "need at least two non-empty batches");
    }
    RegressionSource source(noise, theta_reg, seed);
    const std::size_t per_batch = samples / batches;
    Eigen::Matrix2d total_gg = Eigen::Matrix2d::Zero();
    Eigen::Vector2d total_gy = Eigen::Vector2d::Zero();
    std::vector<Eigen::Vector2d> batch_estimates;
    for (std::size_t bi = 0; bi < batches; ++bi) {
        Eigen::Matrix2d gg = Eigen::Matrix2d::Zero();
        Eigen::Vector2d gy = Eigen::Vector2d::Zero();
        for (std::size_t i = 0; i < per_batch; ++i) {
            const Point2& g = source.covariate();
            const Eigen::Vector2d gv(g[0], g[1]);
            const double y = gv.dot(Eigen::Vector2d(theta_reg(0), theta_reg(1))) + source.noise(g);
            gg += gv * gv.transpose();
            gy += gv * y;
            source.advance();
        }
        batch_estimates.push_back(gg.ldlt().solve(gy));
        total_gg += gg;
        total_gy += gy;
    }
    ReferenceEstimate out;
    out.samples = per_batch * batches;
    out.theta = total_gg.ldlt().solve(total_gy);
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& e : batch_estimates) mean += e;
    mean /= static_cast<double>(batches);
    Eigen::Vector2d var = Eigen::Vector2d::Zero();
    for (const auto& e : batch_estimates) var += (e - mean).cwiseAbs2();
    var /= static_cast<double>(batches - 1);
    out.se = (var / static_cast<double>(batches)).cwiseSqrt();
    return out;
}

TrajectorySummary regression_run(const RegressionConfig& config, double alpha) {
    const std::vector<double> alphas{alpha};
    auto out = regression_multi(config, alphas);
    if (out.front().diverged) throw DivergedError(out.front().diverged_at, alpha);
    return std::move(out.front());
}

std::vector<TrajectorySummary> regression_multi(const RegressionConfig& config,
                                                std::span<const double> alphas) {
    const detail::Plan plan = regression_plan(config);
    std::vector<detail::Track> tracks;
    for (double a : alphas) {
        if (!(a >= 0.0)) throw Error(ErrorCode::InvalidParameter, "stepsize must be nonnegative");
        tracks.push_back({a, config.decay_power, config.theta0});
    }
    RegressionSource source(config.noise, config.theta_reg, config.seed);
    auto out = detail::run_lockstep(source, 2, tracks, plan);
    for (auto& s : out) s.notes = regression_notes(config) + "; " + s.notes;
    return out;
}

RegressionRr rr_regression(const RegressionConfig& config, std::span<const double> alphas) {
    RegressionRr out;
    const RrScheme scheme = rr_coefficients(alphas);
    out.runs = regression_multi(config, alphas);
    for (const auto& r : out.runs) {
        if (r.diverged) throw DivergedError(r.diverged_at, r.alpha);
    }
    out.rr = rr_extrapolate(out.runs, scheme, regression_target(config.noise, config.theta_reg));
    return out;
}

double ks_uniform(std::vector<double> samples, double lo, double hi) {
    if (samples.empty()) throw Error(ErrorCode::InvalidParameter, "no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double F = std::clamp((samples[i] - lo) / (hi - lo), 0.0, 1.0);
        d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
    }
    return d;
}

double ks_critical(std::size_t n, double level) {
    return std::sqrt(-0.5 * std::log(level / 2.0)) / std::sqrt(static_cast<double>(n));
}

}  // namespace mlsa
