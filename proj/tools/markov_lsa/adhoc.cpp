#include "cli.hpp"

#include "mlsa/bias.hpp"
#include "mlsa/error.hpp"
#include "mlsa/extrapolation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace cli {

namespace {

std::string vec(const Vector& v) {
    std::ostringstream o;
    o << '(';
    for (Eigen::Index i = 0; i < v.size(); ++i) o << (i ? ", " : "") << fmt(v(i));
    o << ')';
    return o.str();
}

int spectral(const Settings& s) {
    const Instance inst = resolve_instance(s.str("instance"));
    const auto r = mlsa::spectral_report(inst.chain);
    const double eps = s.real("eps");
    std::printf("states %zu\nergodic %s\nstationary %s\nresidual %.3g\n", inst.chain.size(),
                inst.chain.is_ergodic() ? "yes" : "no", vec(inst.chain.stationary()).c_str(),
                inst.chain.stationary_residual());
    std::printf("slem %.10g\nabsolute gap %.10g\nreversible %s (detailed-balance violation %.3g)\n", r.slem, r.gap,
                r.reversible ? "yes" : "no", r.detailed_balance_violation);
    std::printf("eigenvalues");
    for (const auto& e : r.eigenvalues) std::printf(" %.6g%+.6gi", e.real(), e.imag());
    std::printf("\n(A,b)-mixing time at eps=%g: %zu\n", eps,
                mlsa::mixing_time(inst.chain, inst.problem.A, inst.problem.b, eps));
    return 0;
}

int problem_info(const Settings& s) {
    const Instance inst = resolve_instance(s.str("instance"));
    const auto& p = inst.problem;
    const auto cert = mlsa::lyapunov_certificate(p);
    std::printf("label %s\nn %zu\nd %zu\ntheta* %s\n", p.label.c_str(), p.n, p.d, vec(p.theta_star).c_str());
    std::printf("A_max %.6g\nb_max %.6g\nscale %.6g\nspectral abscissa of Abar %.6g\n", p.A_max, p.b_max, p.scale,
                mlsa::spectral_abscissa(p.Abar));
    std::printf("gamma_min %.6g\ngamma_max %.6g\nkappa %.6g\nlyapunov residual %.3g\n", cert.gamma_min,
                cert.gamma_max, cert.kappa, cert.residual);
    if (s.has("alpha") && !s.str("alpha").empty()) {
        const auto r = mlsa::stepsize_admissible(p, inst.chain, s.real("alpha"), cert);
        std::printf("alpha %s: tau %zu, alpha*tau %.4g, bound %.4g, admissible %s\n", s.str("alpha").c_str(),
                    r.tau_alpha, r.product, r.bound, r.admissible ? "yes" : "no");
    }
    const double a = mlsa::largest_admissible_stepsize(p, inst.chain);
    std::printf("largest admissible alpha on the 1e-2 * 0.8^j grid %.6g\n", a);
    return 0;
}

int rr_coefficients_cmd(const Settings& s) {
    const auto scheme = mlsa::rr_coefficients(s.reals("alphas"));
    for (std::size_t i = 0; i < scheme.h.size(); ++i) {
        std::printf("alpha %-10s h %s\n", fmt(scheme.alphas[i]).c_str(), fmt(scheme.h[i]).c_str());
    }
    std::printf("residual %.3g\nsum|h| %.6g\nvandermonde cross-check %.3g\n", mlsa::rr_residual(scheme),
                scheme.sum_abs_h, scheme.cross_check_error);
    return 0;
}

int oracle(const Settings& s) {
    const Instance inst = resolve_instance(s.str("instance"));
    const auto& p = inst.problem;
    const double alpha = s.real("alpha");
    const std::size_t order = s.count("order");
    const auto sol = mlsa::exact_stationary_mean(p, inst.chain, alpha);
    const auto ex = mlsa::bias_expansion(p, inst.chain, order);
    std::printf("theta* %s\nmean %s\nbias %s\n|bias| %.10g\nresidual %.3g\nrcond %.3g\n", vec(p.theta_star).c_str(),
                vec(sol.mean).c_str(), vec(sol.bias).c_str(), sol.bias.norm(), sol.residual, sol.rcond);
    std::printf("||Xi||_pi %.6g (series radius %.6g)\n", ex.xi_norm, 1.0 / ex.xi_norm);
    for (std::size_t i = 0; i < ex.B.size(); ++i) std::printf("B(%zu) %s\n", i + 1, vec(ex.B[i]).c_str());
    std::printf("sum_{i<=%zu} alpha^i B(i) %s\n", order, vec(ex.truncated_bias(alpha, order)).c_str());
    if (alpha * ex.xi_norm < 1.0) {
        const Vector series = mlsa::infinite_series_mean(ex, p, alpha);
        std::printf("series mean %s (|series - exact| %.3g)\n", vec(series).c_str(), (series - sol.mean).norm());
    } else {
        std::printf("series mean skipped: alpha ||Xi|| >= 1\n");
    }
    return 0;
}

int zero_bias(const Settings& s) {
    const Instance inst = resolve_instance(s.str("instance"));
    const auto r = mlsa::zero_bias_condition(inst.problem, inst.chain, s.real("tol"));
    std::printf("zero-bias condition %s\nmax violation %.6g\n", r.holds ? "holds" : "fails", r.max_violation);
    for (std::size_t x = 0; x < r.violation.size(); ++x) std::printf("state %zu %.6g\n", x, r.violation[x]);
    return 0;
}

int simulate(const Settings& s) {
    const Instance inst = resolve_instance(s.str("instance"));
    const double alpha = s.real("alpha");
    mlsa::RunConfig c;
    c.alpha = alpha;
    c.K = s.count("K");
    c.seed = s.u64("seed");
    c.k0_policy = s.k0_policy();
    c.k0 = s.fixed_k0();
    c.decay_power = s.real("decay");
    if (s.str("x0") != "stationary") c.x0 = s.count("x0");
    Output out(s, "simulate");
    admissibility_banner(out, inst, {alpha});
    const auto run = mlsa::simulate(inst.problem, inst.chain, c);
    std::vector<std::string> cols{"k", "k0", "err_raw", "err_ta"};
    for (std::size_t i = 0; i < inst.problem.d; ++i) cols.push_back("theta_bar_" + std::to_string(i));
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < run.k.size(); ++i) {
        std::vector<double> row{static_cast<double>(run.k[i]), static_cast<double>(run.k0[i]), run.err_raw[i],
                                run.err_ta[i]};
        for (Eigen::Index j = 0; j < run.theta_bar[i].size(); ++j) row.push_back(run.theta_bar[i](j));
        rows.push_back(std::move(row));
    }
    const std::string file = out.curve("alpha" + s.str("alpha"), s.str("alpha"), cols, rows,
                                       {"instance=" + inst.name, "notes=" + run.notes});
    std::printf("wrote %s/%s\nfinal err_raw %.6g err_ta %.6g\n", out.dir().c_str(), file.c_str(), run.err_raw.back(),
                run.err_ta.back());
    return 0;
}

int coupled(const Settings& s) {
    const Instance inst = resolve_instance(s.str("instance"));
    const auto cert = mlsa::lyapunov_certificate(inst.problem);
    const double alpha = s.str("alpha") == "admissible" ? mlsa::largest_admissible_stepsize(inst.problem, inst.chain)
                                                        : s.real("alpha");
    mlsa::CouplingConfig c;
    c.alpha = alpha;
    c.K = s.count("K");
    c.seed = s.u64("seed");
    c.pairs = s.count("pairs");
    c.init = s.str("init") == "fixed" ? mlsa::CouplingInit::Fixed : mlsa::CouplingInit::Isotropic;
    c.theta0_a = Vector::Ones(static_cast<Eigen::Index>(inst.problem.d));
    c.theta0_b = Vector::Zero(static_cast<Eigen::Index>(inst.problem.d));
    c.fit_from = s.count("fit_from");
    const auto r = mlsa::simulate_coupled(inst.problem, inst.chain, c);
    const double rate = 1.0 - 0.9 * alpha / cert.gamma_max;
    std::printf("alpha %.6g\nm0 %.6g\nrho_hat %.12f (se %.3g, %zu points)\nrate 1-0.9 alpha/gamma_max %.12f\n"
                "within rate + 3 se: %s\n",
                alpha, r.m0, r.rho_hat, r.rho_se, r.fit_points, rate, r.rho_hat <= rate + 3 * r.rho_se ? "yes" : "no");
    return 0;
}

int random_instance(const Settings& s) {
    const auto [chain, problem] = mlsa::random_problem(s.count("n"), s.count("d"), s.u64("seed"));
    const std::string path = s.str("file");
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path);
    mlsa::write_problem(f, chain, problem);
    std::printf("wrote %s (%s)\n", path.c_str(), problem.label.c_str());
    return 0;
}

int plot(const Settings& s) {
    const std::string fig = s.str("fig");
    if (fig.empty()) throw ConfigError("plot needs --fig FILE");
    std::string svg = s.str("svg");
    if (svg.empty()) svg = (fig.size() > 4 && fig.substr(fig.size() - 4) == ".fig" ? fig.substr(0, fig.size() - 4) : fig) + ".svg";
    const auto slash = fig.find_last_of('/');
    mlsa::render_figure(mlsa::read_figure_file(fig), slash == std::string::npos ? "." : fig.substr(0, slash), svg);
    std::printf("wrote %s\n", svg.c_str());
    return 0;
}

}  // namespace

std::vector<Command> adhoc_commands() {
    return {
        {"spectral", "stationary distribution, spectrum, reversibility and mixing time",
         {{"instance", "random:89", "finite instance"}, {"eps", "0.01", "mixing tolerance"}}, spectral},
        {"problem-info", "target, Lyapunov certificate and stepsize admissibility",
         {{"instance", "random:89", "finite instance"}, {"alpha", "", "stepsize to check (optional)"}},
         problem_info},
        {"rr-coefficients", "extrapolation weights for a stepsize set", {{"alphas", "0.1,0.2", "stepsizes"}},
         rr_coefficients_cmd},
        {"oracle", "exact stationary mean and bias-expansion coefficients",
         {{"instance", "two-state", "finite instance"}, {"alpha", "0.05", "stepsize"}, {"order", "3", "coefficients"}},
         oracle},
        {"zero-bias", "check the zero-bias sufficient condition",
         {{"instance", "two-state", "finite instance"}, {"tol", "1e-10", "tolerance"}}, zero_bias},
        {"simulate", "single trajectory summary CSV",
         {{"instance", "two-state", "finite instance"},
          {"alpha", "0.1", "stepsize"},
          {"K", "100000", "iterations"},
          {"seed", "1", "seed"},
          {"k0", "half", "tail-average start"},
          {"x0", "stationary", "start state index or stationary"},
          {"decay", "0", "alpha_k = alpha / (k+1)^decay"},
          {"out", "out", "output directory"}},
         simulate},
        {"coupled", "coupled-pair contraction diagnostic",
         {{"instance", "random:89", "finite instance"},
          {"alpha", "admissible", "stepsize or 'admissible'"},
          {"K", "1000", "iterations"},
          {"seed", "1", "seed"},
          {"pairs", "1000", "coupled pairs"},
          {"init", "isotropic", "isotropic or fixed"},
          {"fit_from", "0", "first checkpoint used by the rate fit"}},
         coupled},
        {"random-instance", "write a random problem file",
         {{"n", "8", "states"}, {"d", "4", "dimension"}, {"seed", "89", "seed"}, {"file", "instance.txt", "output"}},
         random_instance},
        {"plot", "render a figure file to SVG from its CSVs",
         {{"fig", "", "figure description file"}, {"svg", "", "output SVG (default: next to the figure file)"}}, plot},
    };
}

}  // namespace cli
