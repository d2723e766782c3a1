#include "fixtures.hpp"
#include "mlsa/bias.hpp"
#include "mlsa/engine.hpp"
#include "mlsa/error.hpp"
#include "mlsa/extrapolation.hpp"
#include "mlsa/sgd.hpp"
#include "mlsa/td.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace mlsa;

namespace {

constexpr std::size_t kDeskK = 1'000'000;
constexpr std::size_t kSeeds = 20;
constexpr std::uint64_t kSeedBase = 1000;
constexpr std::uint64_t kFigureInstanceSeed = 89;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Per-alpha seed runs sharing one data stream per seed.
std::vector<std::vector<TrajectorySummary>> seed_runs(const LsaProblem& problem, const FiniteChain& chain,
                                                      const std::vector<double>& alphas, RunConfig base) {
    std::vector<std::vector<TrajectorySummary>> runs(alphas.size());
    for (std::size_t s = 0; s < kSeeds; ++s) {
        base.seed = kSeedBase + s;
        auto r = simulate_multi(problem, chain, alphas, base);
        for (std::size_t j = 0; j < alphas.size(); ++j) runs[j].push_back(std::move(r[j]));
    }
    return runs;
}

Vector seed_mean(const std::vector<TrajectorySummary>& runs, std::size_t c) {
    Vector m = Vector::Zero(runs.front().theta_bar[c].size());
    for (const auto& r : runs) m += r.theta_bar[c];
    return m / static_cast<double>(runs.size());
}

Outcome rr_exactness() {
    const std::vector<std::vector<double>> sets{
        {0.2}, {0.1, 0.2}, {1, 2, 3}, {0.05, 0.1, 0.2, 0.4}, {1.9, 2.1, 2.3, 2.5, 2.7},
        {1.9, 2.1, 2.3, 2.5, 2.7, 2.9}};
    double worst = 0.0;
    for (const auto& s : sets) worst = std::max(worst, rr_residual(rr_coefficients(s)));
    const auto two = rr_coefficients(std::vector<double>{0.1, 0.2}).h;
    const auto three = rr_coefficients(std::vector<double>{1, 2, 3}).h;
    const double coef = std::max({std::abs(two[0] - 2), std::abs(two[1] + 1), std::abs(three[0] - 3),
                                  std::abs(three[1] + 3), std::abs(three[2] - 1)});
    return {worst < 1e-10 && coef < 1e-10,
            "max residual " + fmt("%.2e", worst) + ", known-coefficient error " + fmt("%.2e", coef)};
}

Outcome oracle_consistency() {
    std::vector<std::pair<FiniteChain, LsaProblem>> instances;
    for (std::uint64_t s = 1; s <= 5; ++s) instances.push_back(random_problem(8, 4, s));
    const Mrp mrp = problematic_mrp();
    TdInstance td = td_problem(mrp, polynomial_features(mrp.nS));
    instances.emplace_back(td.chain, td.problem);
    double gap = 0.0, residual = 0.0;
    std::size_t checks = 0;
    for (const auto& [chain, problem] : instances) {
        const BiasExpansion ex = bias_expansion(problem, chain, 1);
        for (double f : {0.1, 0.5, 0.9}) {
            const double alpha = f / ex.xi_norm;
            const StationarySolution sol = exact_stationary_mean(problem, chain, alpha);
            const Vector series = infinite_series_mean(ex, problem, alpha);
            gap = std::max(gap, (series - sol.mean).norm());
            residual = std::max(residual, sol.residual);
            ++checks;
        }
    }
    return {gap < 1e-9 && residual < 1e-9,
            std::to_string(checks) + " checks, max |series - BAR| " + fmt("%.2e", gap) +
                ", max BAR residual " + fmt("%.2e", residual)};
}

Outcome expansion_order() {
    std::vector<std::pair<FiniteChain, LsaProblem>> instances;
    instances.push_back(fixtures::two_state_scalar(0.2));
    instances.push_back(random_problem(8, 4, 1));
    const double alpha = 0.02;
    bool pass = true;
    std::ostringstream d;
    for (const auto& [chain, problem] : instances) {
        const BiasExpansion ex = bias_expansion(problem, chain, 3);
        const Vector b1 = exact_stationary_mean(problem, chain, alpha).bias;
        const Vector b2 = exact_stationary_mean(problem, chain, alpha / 2).bias;
        d << problem.label << ":";
        for (std::size_t m = 1; m <= 3; ++m) {
            const double e1 = (b1 - ex.truncated_bias(alpha, m)).norm();
            const double e2 = (b2 - ex.truncated_bias(alpha / 2, m)).norm();
            const double slope = std::log2(e1 / e2);
            pass = pass && slope >= m + 0.5 && slope <= m + 1.5;
            d << " m" << m << "=" << fmt("%.3f", slope);
        }
        d << ";";
    }
    return {pass, d.str()};
}

Outcome zero_bias_suite() {
    const auto [rchain, rproblem] = random_problem(8, 4, 1);
    const FiniteChain iid = fixtures::iid_chain(rchain.stationary());
    const LsaProblem iid_problem = build_problem(iid, rproblem.A, rproblem.b, false, "iid");
    const LsaProblem const_a = build_problem(
        rchain, std::vector<Matrix>(rproblem.n, rproblem.Abar), rproblem.b, false, "constant-A");
    const TdInstance semi = semi_simulator_problem(problematic_mrp());
    const std::vector<std::pair<const FiniteChain*, const LsaProblem*>> cases{
        {&iid, &iid_problem}, {&rchain, &const_a}, {&semi.chain, &semi.problem}};
    double worst = 0.0;
    for (const auto& [chain, problem] : cases) {
        for (double alpha : {0.01, 0.02, 0.05}) {
            worst = std::max(worst, exact_stationary_mean(*problem, *chain, alpha).bias.norm());
        }
    }
    return {worst < 1e-9, "max |bias| " + fmt("%.2e", worst) + " over iid, constant-A, semi-simulator"};
}

Outcome reversible_bound() {
    bool pass = true;
    std::ostringstream d;
    for (double p : {0.3, 0.1, 0.03}) {
        const FiniteChain chain = fixtures::symmetric_two_state(p);
        const auto [c2, problem] = fixtures::two_state_scalar(p);
        const ReversibleBoundReport r =
            reversible_bias_bound(problem, chain, bias_expansion(problem, chain, 5), 5);
        double worst = 0.0;
        for (const auto& row : r.rows) worst = std::max(worst, row.norm_B / row.bound);
        pass = pass && r.all_satisfied() && r.rows.size() == 5;
        d << " p=" << p << " max ||B||/bound=" << fmt("%.3f", worst) << ";";
    }
    return {pass, d.str()};
}

// Tail-average mean over seeds within 3 standard errors of the exact mean, componentwise.
std::pair<bool, std::string> mc_vs_oracle(const FiniteChain& chain, const LsaProblem& problem,
                                          const std::string& name) {
    const double alpha = largest_admissible_stepsize(problem, chain);
    RunConfig base;
    base.alpha = alpha;
    base.K = kDeskK;
    base.checkpoints = {kDeskK};
    const SeedAggregate agg = run_seeds(problem, chain, base, kSeeds);
    const Vector exact = exact_stationary_mean(problem, chain, alpha).mean;
    const Vector& mean = agg.theta_bar.back();
    const Vector& se = agg.theta_bar_se.back();
    double z = 0.0;
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
        z = std::max(z, std::abs(mean(i) - exact(i)) / se(i));
    }
    return {z <= 3.0, name + " alpha=" + fmt("%.3g", alpha) + " max |mean-exact|/se=" + fmt("%.2f", z) +
                          " |mean-exact|=" + fmt("%.2e", (mean - exact).norm())};
}

Outcome monte_carlo_vs_oracle() {
    const auto [chain, problem] = fixtures::two_state_scalar(0.2);
    const Mrp mrp = problematic_mrp();
    const TdInstance td = td_problem(mrp, polynomial_features(mrp.nS));
    const auto a = mc_vs_oracle(chain, problem, "two-state");
    const auto b = mc_vs_oracle(td.chain, td.problem, "td");
    return {a.first && b.first, a.second + "; " + b.second};
}

Outcome coupling_contraction() {
    const auto [chain, problem] = random_problem(8, 4, kFigureInstanceSeed);
    const LyapunovCert cert = lyapunov_certificate(problem);
    const double alpha = largest_admissible_stepsize(problem, chain);
    const std::size_t tau = stepsize_admissible(problem, chain, alpha, cert).tau_alpha;
    CouplingConfig c;
    c.alpha = alpha;
    c.K = 8 * tau;
    c.seed = kSeedBase;
    c.pairs = 1000;
    c.init = CouplingInit::Isotropic;
    c.radius = 1.0;
    c.checkpoints = {tau, 2 * tau, 4 * tau, 8 * tau};
    c.fit_from = 2 * tau;
    const CouplingSummary s = simulate_coupled(problem, chain, c);
    const double rate = 1.0 - 0.9 * alpha / cert.gamma_max;
    const double limit = rate + 3.0 * s.rho_se;
    return {s.rho_hat <= limit,
            "alpha=" + fmt("%.3g", alpha) + " tau=" + std::to_string(tau) + " rho_hat=" +
                fmt("%.10f", s.rho_hat) + " limit=" + fmt("%.10f", limit) + " (se " +
                fmt("%.2e", s.rho_se) + ")"};
}

Outcome plateau_proportionality() {
    const auto [chain, problem] = random_problem(8, 4, kFigureInstanceSeed);
    const std::vector<double> alphas{0.2, 0.4, 0.8};
    RunConfig base;
    base.K = kDeskK;
    const auto runs = seed_runs(problem, chain, alphas, base);
    const auto& k = runs[0][0].k;
    std::vector<std::vector<double>> ta(3), rr(2);
    for (std::size_t c = 0; c < k.size(); ++c) {
        Vector m[3];
        for (std::size_t j = 0; j < 3; ++j) {
            m[j] = seed_mean(runs[j], c);
            ta[j].push_back((m[j] - problem.theta_star).norm());
        }
        for (std::size_t j = 0; j < 2; ++j) rr[j].push_back((2.0 * m[j] - m[j + 1] - problem.theta_star).norm());
    }
    const double t1 = plateau(k, ta[1]) / plateau(k, ta[0]);
    const double t2 = plateau(k, ta[2]) / plateau(k, ta[1]);
    const double r = plateau(k, rr[1]) / plateau(k, rr[0]);
    const bool pass = t1 >= 1.6 && t1 <= 2.4 && t2 >= 1.6 && t2 <= 2.4 && r >= 3.0 && r <= 5.0;
    return {pass, "TA ratios " + fmt("%.3f", t1) + ", " + fmt("%.3f", t2) + " (need [1.6,2.4]); RR ratio " +
                      fmt("%.3f", r) + " (need [3,5])"};
}

Outcome rr6_vs_ta() {
    const Mrp mrp = problematic_mrp();
    const TdInstance td = td_problem(mrp, polynomial_features(mrp.nS));
    const std::vector<double> alphas{1.9, 2.1, 2.3, 2.5, 2.7, 2.9};
    RunConfig base;
    base.K = kDeskK;
    base.checkpoints = {kDeskK};
    const auto runs = seed_runs(td.problem, td.chain, alphas, base);
    std::vector<Vector> means;
    double best_ta = std::numeric_limits<double>::infinity();
    for (const auto& r : runs) {
        means.push_back(seed_mean(r, 0));
        best_ta = std::min(best_ta, (means.back() - td.problem.theta_star).norm());
    }
    const Vector rr = rr_combine(means, rr_coefficients(alphas));
    const double rr_err = (rr - td.problem.theta_star).norm();
    const double ratio = best_ta / rr_err;
    return {ratio >= 100.0, "best TA " + fmt("%.3e", best_ta) + ", RR6 " + fmt("%.3e", rr_err) + ", ratio " +
                                fmt("%.1f", ratio) + " (need >= 100)"};
}

Outcome sgd_suite() {
    std::ostringstream d;
    bool ks_pass = true;
    {
        MhSampler s(kSeedBase);
        const std::size_t samples = 100'000, thin = 10;
        std::vector<double> x0, x1;
        for (std::size_t i = 0; i < samples * thin; ++i) {
            const auto& g = s.step();
            if (i % thin == thin - 1) {
                x0.push_back(g[0]);
                x1.push_back(g[1]);
            }
        }
        const double crit = ks_critical(samples, 1e-3);
        const double d0 = ks_uniform(x0, -1, 1), d1 = ks_uniform(x1, -1, 1);
        ks_pass = d0 < crit && d1 < crit;
        d << "KS " << fmt("%.4f", d0) << "/" << fmt("%.4f", d1) << " < " << fmt("%.4f", crit) << ";";
    }
    const std::vector<double> alphas{0.01, 0.02, 0.04};
    bool mono = true;
    {
        RegressionConfig c;
        c.noise = NoiseModel::IidUniform;
        c.K = kDeskK;
        c.checkpoints = {10'000, 100'000, 1'000'000};
        std::vector<std::vector<TrajectorySummary>> runs(alphas.size());
        for (std::size_t s = 0; s < kSeeds; ++s) {
            c.seed = kSeedBase + s;
            auto r = regression_multi(c, alphas);
            for (std::size_t j = 0; j < alphas.size(); ++j) runs[j].push_back(std::move(r[j]));
        }
        d << " iid TA err";
        for (std::size_t j = 0; j < alphas.size(); ++j) {
            const SeedAggregate agg = aggregate(runs[j]);
            mono = mono && agg.err_ta[0] > agg.err_ta[1] && agg.err_ta[1] > agg.err_ta[2];
            d << " a=" << alphas[j] << ":" << fmt("%.2e", agg.err_ta[0]) << ">" << fmt("%.2e", agg.err_ta[1])
              << ">" << fmt("%.2e", agg.err_ta[2]);
        }
        d << ";";
    }
    bool ratio_pass = true;
    {
        RegressionConfig c;
        c.noise = NoiseModel::SignCorrelated;
        c.K = kDeskK;
        std::vector<std::vector<TrajectorySummary>> runs(alphas.size());
        for (std::size_t s = 0; s < kSeeds; ++s) {
            c.seed = kSeedBase + s;
            auto r = regression_multi(c, alphas);
            for (std::size_t j = 0; j < alphas.size(); ++j) runs[j].push_back(std::move(r[j]));
        }
        const Vector target = regression_target(c.noise, c.theta_reg);
        const auto& k = runs[0][0].k;
        std::vector<double> p;
        for (const auto& r : runs) {
            std::vector<double> err;
            for (std::size_t i = 0; i < k.size(); ++i) err.push_back((seed_mean(r, i) - target).norm());
            p.push_back(plateau(k, err));
        }
        d << " sign-correlated ratios";
        for (std::size_t j = 0; j + 1 < p.size(); ++j) {
            const double ratio = p[j + 1] / p[j];
            ratio_pass = ratio_pass && ratio >= 1.5 && ratio <= 2.5;
            d << " " << fmt("%.3f", ratio);
        }
        d << " (need [1.5,2.5])";
    }
    return {ks_pass && mono && ratio_pass, d.str()};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"RR coefficient exactness", rr_exactness},
        {"oracle self-consistency", oracle_consistency},
        {"bias-expansion order", expansion_order},
        {"zero-bias suite", zero_bias_suite},
        {"reversible bound", reversible_bound},
        {"Monte Carlo vs oracle", monte_carlo_vs_oracle},
        {"coupling contraction", coupling_contraction},
        {"plateau proportionality", plateau_proportionality},
        {"RR with 6 stepsizes vs TA", rr6_vs_ta},
        {"SGD suite", sgd_suite},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failures;
        std::printf("%s criterion %zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
