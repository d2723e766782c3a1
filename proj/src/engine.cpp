#include "mlsa/engine.hpp"

#include "mlsa/error.hpp"
#include "runner.hpp"
#include "streams.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace mlsa {

std::string to_string(K0Policy policy) {
    return policy == K0Policy::Half ? "half" : "fixed";
}

std::vector<std::size_t> log_checkpoints(std::size_t K, std::size_t per_decade) {
    if (K == 0) throw Error(ErrorCode::InvalidParameter, "K must be positive");
    if (per_decade == 0) throw Error(ErrorCode::InvalidParameter, "per_decade must be positive");
    std::vector<std::size_t> out;
    const double decades = std::log10(static_cast<double>(K));
    const auto steps = static_cast<std::size_t>(std::ceil(decades * static_cast<double>(per_decade)));
    for (std::size_t i = 0; i <= steps; ++i) {
        const double v = std::pow(10.0, decades * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(steps, 1)));
        const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(v)), 1, K);
        if (out.empty() || k > out.back()) out.push_back(k);
    }
    if (out.back() != K) out.push_back(K);
    return out;
}

ChainSampler::ChainSampler(const FiniteChain& chain, std::uint64_t seed, std::uint64_t stream_id,
                           std::optional<std::size_t> x0)
    : cdf_(chain.cumulative_rows()), n_(chain.size()), x_(0), rng_(seed, stream_id) {
    if (x0) {
        if (*x0 >= n_) throw Error(ErrorCode::InvalidParameter, "start state out of range");
        x_ = *x0;
    } else {
        std::vector<double> pi_cdf(n_);
        double acc = 0.0;
        for (std::size_t x = 0; x < n_; ++x) {
            acc += chain.stationary()(static_cast<Eigen::Index>(x));
            pi_cdf[x] = acc;
        }
        x_ = sample_from_cdf(pi_cdf, rng_.uniform());
    }
}

std::size_t ChainSampler::step() noexcept {
    x_ = sample_from_cdf(std::span<const double>(cdf_.data() + x_ * n_, n_), rng_.uniform());
    return x_;
}

void CompensatedSum::add(double v) noexcept {
    const double t = sum_ + v;
    comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
    sum_ = t;
}

namespace detail {

void validate_plan(const Plan& plan) {
    if (plan.K == 0) throw Error(ErrorCode::InvalidParameter, "K must be positive");
    const auto& c = plan.checkpoints;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] > plan.K) throw Error(ErrorCode::InvalidParameter, "checkpoint beyond K");
        if (i > 0 && c[i] <= c[i - 1]) {
            throw Error(ErrorCode::InvalidParameter, "checkpoints must be strictly increasing");
        }
    }
}

ChainSource::ChainSource(const LsaProblem& problem, const FiniteChain& chain, std::uint64_t seed,
                         std::uint64_t stream_id, std::optional<std::size_t> x0)
    : d_(problem.d), dd_(problem.d * problem.d), sampler_(chain, seed, stream_id, x0) {
    A_.resize(problem.n * dd_);
    b_.resize(problem.n * d_);
    for (std::size_t x = 0; x < problem.n; ++x) {
        for (std::size_t i = 0; i < d_; ++i) {
            for (std::size_t j = 0; j < d_; ++j) {
                A_[x * dd_ + i * d_ + j] =
                    problem.A[x](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
            b_[x * d_ + i] = problem.b[x](static_cast<Eigen::Index>(i));
        }
    }
}

}  // namespace detail

namespace {

detail::Plan make_plan(const LsaProblem& problem, const FiniteChain& chain, const RunConfig& c) {
    if (problem.n != chain.size()) {
        throw Error(ErrorCode::InvalidParameter, "problem and chain state counts differ");
    }
    detail::Plan plan;
    plan.K = c.K;
    plan.checkpoints = c.checkpoints.empty() ? log_checkpoints(c.K) : c.checkpoints;
    plan.policy = c.k0_policy;
    plan.fixed_k0 = c.k0;
    plan.theta_star = problem.theta_star;
    plan.seed = c.seed;
    plan.stationary_start = !c.x0.has_value();
    detail::validate_plan(plan);
    return plan;
}

Vector initial_theta(const LsaProblem& problem, const RunConfig& c) {
    const auto d = static_cast<Eigen::Index>(problem.d);
    if (!c.theta0) return Vector::Zero(d);
    if (c.theta0->size() != d) throw Error(ErrorCode::InvalidParameter, "theta0 has wrong size");
    return *c.theta0;
}

void check_alpha(double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw Error(ErrorCode::InvalidParameter, "stepsize must be finite and nonnegative");
    }
}

}  // namespace

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& f) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, count);
    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::size_t failed_index = count;
    std::mutex mutex;
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard lock(mutex);
                    if (i < failed_index) {
                        failed_index = i;
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
}

TrajectorySummary simulate(const LsaProblem& problem, const FiniteChain& chain,
                           const RunConfig& config) {
    check_alpha(config.alpha);
    const detail::Plan plan = make_plan(problem, chain, config);
    const detail::Track track{config.alpha, config.decay_power, initial_theta(problem, config)};
    detail::ChainSource source(problem, chain, config.seed, streams::kDataStream, config.x0);
    auto out = detail::run_lockstep(source, problem.d, std::span(&track, 1), plan);
    if (out.front().diverged) throw DivergedError(out.front().diverged_at, config.alpha);
    return std::move(out.front());
}

std::vector<TrajectorySummary> simulate_multi(const LsaProblem& problem, const FiniteChain& chain,
                                              std::span<const double> alphas,
                                              const RunConfig& base, std::size_t jobs) {
    if (alphas.empty()) throw Error(ErrorCode::InvalidParameter, "no stepsizes given");
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (!(alphas[i] > 0.0) || !std::isfinite(alphas[i])) {
            throw Error(ErrorCode::InvalidParameter, "stepsizes must be positive");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (alphas[i] == alphas[j]) throw Error(ErrorCode::InvalidParameter, "duplicate stepsize");
        }
    }
    const detail::Plan plan = make_plan(problem, chain, base);
    const Vector theta0 = initial_theta(problem, base);
    std::vector<detail::Track> tracks;
    for (double a : alphas) tracks.push_back({a, base.decay_power, theta0});

    if (jobs == 1) {
        detail::ChainSource source(problem, chain, base.seed, streams::kDataStream, base.x0);
        return detail::run_lockstep(source, problem.d, tracks, plan);
    }
    std::vector<TrajectorySummary> out(tracks.size());
    parallel_for(tracks.size(), jobs, [&](std::size_t i) {
        detail::ChainSource source(problem, chain, base.seed, streams::kDataStream, base.x0);
        out[i] = std::move(detail::run_lockstep(source, problem.d, std::span(&tracks[i], 1), plan).front());
    });
    return out;
}

SeedAggregate aggregate(std::span<const TrajectorySummary> runs) {
    if (runs.empty()) throw Error(ErrorCode::InvalidParameter, "nothing to aggregate");
    SeedAggregate agg;
    agg.k = runs.front().k;
    agg.seeds = runs.size();
    for (const auto& r : runs) {
        if (r.k != agg.k) throw Error(ErrorCode::AlignmentError, "checkpoint mismatch across seeds");
        agg.seed_list.push_back(r.seed);
    }
    const double n = static_cast<double>(runs.size());
    const auto mean_se = [&](auto&& value) {
        CompensatedSum s;
        for (const auto& r : runs) s.add(value(r));
        const double mean = s.value() / n;
        CompensatedSum sq;
        for (const auto& r : runs) {
            const double dv = value(r) - mean;
            sq.add(dv * dv);
        }
        const double se = runs.size() > 1 ? std::sqrt(sq.value() / (n - 1.0) / n) : 0.0;
        return std::pair{mean, se};
    };
    const Eigen::Index d = runs.front().theta_bar.front().size();
    for (std::size_t c = 0; c < agg.k.size(); ++c) {
        agg.err_raw.push_back(mean_se([&](const TrajectorySummary& r) { return r.err_raw[c]; }).first);
        agg.err_ta.push_back(mean_se([&](const TrajectorySummary& r) { return r.err_ta[c]; }).first);
        const auto [mse, mse_se] =
            mean_se([&](const TrajectorySummary& r) { return r.err_raw[c] * r.err_raw[c]; });
        agg.mse_raw.push_back(mse);
        agg.mse_raw_se.push_back(mse_se);
        Vector mean(d), se(d);
        for (Eigen::Index i = 0; i < d; ++i) {
            const auto [m, s] = mean_se([&](const TrajectorySummary& r) { return r.theta_bar[c](i); });
            mean(i) = m;
            se(i) = s;
        }
        agg.theta_bar.push_back(std::move(mean));
        agg.theta_bar_se.push_back(std::move(se));
    }
    return agg;
}

SeedAggregate run_seeds(const LsaProblem& problem, const FiniteChain& chain,
                        const RunConfig& base, std::size_t seeds, std::size_t jobs) {
    if (seeds == 0) throw Error(ErrorCode::InvalidParameter, "need at least one seed");
    std::vector<TrajectorySummary> runs(seeds);
    parallel_for(seeds, jobs, [&](std::size_t i) {
        RunConfig c = base;
        c.seed = base.seed + i;
        runs[i] = simulate(problem, chain, c);
    });
    return aggregate(runs);
}

CouplingSummary simulate_coupled(const LsaProblem& problem, const FiniteChain& chain,
                                 const CouplingConfig& config) {
    check_alpha(config.alpha);
    if (config.pairs == 0) throw Error(ErrorCode::InvalidParameter, "need at least one pair");
    if (problem.n != chain.size()) {
        throw Error(ErrorCode::InvalidParameter, "problem and chain state counts differ");
    }
    const auto d = static_cast<Eigen::Index>(problem.d);
    std::vector<std::size_t> cps = config.checkpoints.empty() ? log_checkpoints(config.K)
                                                              : config.checkpoints;
    if (cps.empty() || cps.front() != 0) cps.insert(cps.begin(), 0);
    detail::Plan check{config.K, cps, K0Policy::Half, 0, {}, 0, true};
    detail::validate_plan(check);

    Vector theta_a = config.theta0_a.size() == d ? config.theta0_a : Vector::Zero(d);
    if (config.init == CouplingInit::Fixed &&
        (config.theta0_a.size() != d || config.theta0_b.size() != d)) {
        throw Error(ErrorCode::InvalidParameter, "fixed coupling needs both initial iterates");
    }
    if (config.init == CouplingInit::Isotropic && !(config.radius >= 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "radius must be nonnegative");
    }

    std::vector<Matrix> step(problem.n);
    for (std::size_t x = 0; x < problem.n; ++x) {
        step[x] = Matrix::Identity(d, d) + config.alpha * problem.A[x];
    }
    std::vector<CompensatedSum> acc(cps.size());
    for (std::size_t p = 0; p < config.pairs; ++p) {
        Vector omega;
        if (config.init == CouplingInit::Fixed) {
            omega = config.theta0_a - config.theta0_b;
        } else {
            RandomStream init(config.seed, streams::kCouplingInit + p);
            Vector z(d);
            for (Eigen::Index i = 0; i < d; ++i) z(i) = init.normal();
            omega = config.radius * z / z.norm();
        }
        Vector theta = theta_a;
        ChainSampler sampler(chain, config.seed, streams::kCouplingBase + p);
        std::size_t c = 0;
        for (std::size_t k = 0;; ++k) {
            if (c < cps.size() && cps[c] == k) acc[c++].add(omega.squaredNorm());
            if (k == config.K || c == cps.size()) break;
            const std::size_t x = sampler.state();
            omega = step[x] * omega;
            theta = step[x] * theta + config.alpha * problem.b[x];
            if (!(theta.norm() <= kDivergenceThreshold)) throw DivergedError(k + 1, config.alpha);
            sampler.step();
        }
    }

    CouplingSummary out;
    out.k = cps;
    for (auto& a : acc) out.m.push_back(a.value() / static_cast<double>(config.pairs));
    out.m0 = out.m.front();

    std::vector<double> xs, ys;
    for (std::size_t c = 0; c < cps.size(); ++c) {
        if (cps[c] >= config.fit_from && out.m[c] > 0.0) {
            xs.push_back(static_cast<double>(cps[c]));
            ys.push_back(std::log(out.m[c]));
        }
    }
    out.fit_points = xs.size();
    if (xs.size() >= 2) {
        const double n = static_cast<double>(xs.size());
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= n;
        my /= n;
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        const double slope = sxy / sxx;
        double ssr = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double r = ys[i] - my - slope * (xs[i] - mx);
            ssr += r * r;
        }
        const double slope_se = xs.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
        out.rho_hat = std::exp(slope);
        out.rho_se = out.rho_hat * slope_se;
    }
    return out;
}

bool MseBoundReport::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const MseBoundRow& r) { return r.pass; });
}

MseBoundReport mse_bound_check(const LsaProblem& problem, const FiniteChain& chain,
                               const LyapunovCert& cert, double alpha, const SeedAggregate& mc,
                               const Vector& theta0) {
    MseBoundReport report;
    report.tau = stepsize_admissible(problem, chain, alpha, cert).tau_alpha;
    const double s_min = Eigen::JacobiSVD<Matrix>(problem.Abar).singularValues().minCoeff();
    const double init = (theta0 - problem.theta_star).squaredNorm() +
                        problem.b_max * problem.b_max / (s_min * s_min);
    const double rate = 1.0 - 0.9 * alpha / cert.gamma_max;
    const double tail = alpha * static_cast<double>(report.tau) * cert.kappa;
    for (std::size_t c = 0; c < mc.k.size(); ++c) {
        if (mc.k[c] < report.tau) continue;
        MseBoundRow row;
        row.k = mc.k[c];
        row.mse = mc.mse_raw[c];
        row.se = mc.mse_raw_se[c];
        row.bound = 10.0 * cert.gamma_max / cert.gamma_min *
                        std::pow(rate, static_cast<double>(row.k)) * init +
                    tail;
        row.pass = row.mse == 0.0 || row.mse <= row.bound * (1.0 + 3.0 * row.se / row.mse);
        report.rows.push_back(row);
    }
    return report;
}

double plateau(std::span<const std::size_t> k, std::span<const double> values) {
    if (k.empty() || k.size() != values.size()) {
        throw Error(ErrorCode::InvalidParameter, "plateau needs aligned, non-empty series");
    }
    const double lo = static_cast<double>(k.back()) / std::sqrt(10.0);
    std::vector<double> window;
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (static_cast<double>(k[i]) >= lo && std::isfinite(values[i])) window.push_back(values[i]);
    }
    if (window.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(window.begin(), window.end());
    const std::size_t m = window.size();
    return m % 2 ? window[m / 2] : 0.5 * (window[m / 2 - 1] + window[m / 2]);
}

}  // namespace mlsa
