#include "cli.hpp"

#include "mlsa/bias.hpp"
#include "mlsa/error.hpp"
#include "mlsa/extrapolation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>

namespace cli {

namespace {

constexpr std::size_t kMinK = 1000;

std::vector<Param> common(std::vector<Param> extra) {
    std::vector<Param> p{
        {"seed", "1", "base seed; seed i of a multi-seed run uses seed + i"},
        {"K", "1000000", "iterations per trajectory"},
        {"seeds", "1", "independent trajectories per curve"},
        {"jobs", "1", "worker threads (results do not depend on it)"},
        {"k0", "half", "tail-average start: half (k/2) or a fixed index"},
        {"out", "out", "output directory"},
    };
    p.insert(p.end(), extra.begin(), extra.end());
    return p;
}

mlsa::RunConfig run_config(const Settings& s) {
    mlsa::RunConfig c;
    c.K = s.count("K");
    if (c.K < kMinK) throw ConfigError("K must be at least 1000");
    c.seed = s.u64("seed");
    c.k0_policy = s.k0_policy();
    c.k0 = s.fixed_k0();
    return c;
}

std::string tag(double a) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", a);
    return buf;
}

std::vector<std::vector<double>> columns_to_rows(const std::vector<std::size_t>& k,
                                                 const std::vector<std::vector<double>>& cols) {
    std::vector<std::vector<double>> rows;
    for (std::size_t c = 0; c < k.size(); ++c) {
        std::vector<double> row{static_cast<double>(k[c])};
        for (const auto& col : cols) row.push_back(col[c]);
        rows.push_back(std::move(row));
    }
    return rows;
}

// (alpha, 2 alpha) pairs present in the stepsize list.
std::vector<std::pair<std::size_t, std::size_t>> doubling_pairs(const std::vector<double>& alphas) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        for (std::size_t j = 0; j < alphas.size(); ++j) {
            if (std::abs(alphas[j] - 2.0 * alphas[i]) <= 1e-12 * alphas[j]) out.emplace_back(i, j);
        }
    }
    return out;
}

void print_plateaus(const std::string& what, const std::vector<std::string>& labels,
                    const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::printf("%s %-14s plateau %.6g", what.c_str(), labels[i].c_str(), values[i]);
        if (i > 0) std::printf("  ratio to previous %.4f", values[i] / values[i - 1]);
        std::printf("\n");
    }
}

// Shared layout of the LSA and TD constant-stepsize figures.
int ta_rr_figure(const Settings& s, const std::string& name, bool diminishing) {
    const Instance inst = resolve_instance(s.str("instance"));
    const auto alphas = s.reals("alphas");
    Output out(s, name);
    admissibility_banner(out, inst, alphas);
    mlsa::RunConfig base = run_config(s);
    const std::size_t seeds = s.count("seeds"), jobs = s.count("jobs");
    const Family fam = run_family(inst, alphas, base, seeds, jobs);
    const Vector& target = inst.problem.theta_star;
    const std::vector<std::string> extra{"instance=" + inst.name + " label=" + inst.problem.label,
                                         fam.aggregate_label()};

    mlsa::FigureFile fig;
    fig.spec.title = name + ": " + inst.problem.label;
    fig.spec.y_label = "error";
    std::vector<std::string> labels;
    std::vector<double> ta_plateaus;
    for (std::size_t j = 0; j < alphas.size(); ++j) {
        const auto ta = fam.ta_error(j, target);
        const std::string file = out.curve("alpha" + tag(alphas[j]), tag(alphas[j]), {"k", "err_raw", "err_ta"},
                                           columns_to_rows(fam.k, {fam.err_raw[j], ta}), extra);
        fig.curves.push_back({"raw a=" + tag(alphas[j]), file, "k", "err_raw"});
        fig.curves.push_back({"TA a=" + tag(alphas[j]), file, "k", "err_ta"});
        labels.push_back("a=" + tag(alphas[j]));
        ta_plateaus.push_back(mlsa::plateau(fam.k, ta));
    }
    std::vector<std::string> rr_labels;
    std::vector<double> rr_plateaus;
    for (const auto& [i, j] : doubling_pairs(alphas)) {
        const auto rr = fam.rr_error({i, j}, target);
        const std::string pair = tag(alphas[i]) + ";" + tag(alphas[j]);
        const std::string file =
            out.curve("rr" + tag(alphas[i]) + "-" + tag(alphas[j]), pair, {"k", "err_rr"},
                      columns_to_rows(fam.k, {rr}), extra);
        fig.curves.push_back({"RR a=" + tag(alphas[i]) + "," + tag(alphas[j]), file, "k", "err_rr"});
        rr_labels.push_back("a=" + tag(alphas[i]) + "," + tag(alphas[j]));
        rr_plateaus.push_back(mlsa::plateau(fam.k, rr));
    }
    if (diminishing) {
        mlsa::RunConfig d = base;
        d.decay_power = s.real("decay");
        const double a0 = s.real("diminishing");
        const Family dim = run_family(inst, {a0}, d, seeds, jobs);
        const std::string file =
            out.curve("diminishing", tag(a0) + "/(k+1)^" + tag(d.decay_power), {"k", "err_raw"},
                      columns_to_rows(dim.k, {dim.err_raw[0]}), extra);
        fig.curves.push_back({"diminishing " + tag(a0) + "/k^" + tag(d.decay_power), file, "k", "err_raw"});
    }
    out.figure(name, fig);
    print_plateaus("TA", labels, ta_plateaus);
    print_plateaus("RR", rr_labels, rr_plateaus);
    return 0;
}

int lsa_ta_rr(const Settings& s) { return ta_rr_figure(s, "lsa-ta-rr", true); }
int td_ta_rr(const Settings& s) { return ta_rr_figure(s, "td-ta-rr", false); }

int lsa_slem(const Settings& s) {
    const Instance inst = resolve_instance(s.str("instance"));
    const double alpha = s.real("alpha");
    Output out(s, "lsa-slem");
    const mlsa::RunConfig base = run_config(s);
    const double slem = mlsa::spectral_report(inst.chain).slem;
    mlsa::FigureFile fig;
    fig.spec.title = "lsa-slem: " + inst.problem.label + " alpha=" + tag(alpha);
    fig.spec.y_label = "error";
    std::vector<std::string> labels;
    std::vector<double> plateaus;
    for (double beta : s.reals("betas")) {
        const mlsa::FiniteChain chain = mlsa::interpolate_kernel(inst.chain, beta);
        const mlsa::LsaProblem problem =
            mlsa::build_problem(chain, inst.problem.A, inst.problem.b, false, inst.problem.label);
        const Instance mixed{chain, problem, inst.name + " beta=" + tag(beta)};
        const double lambda2 = mlsa::spectral_report(chain).slem;
        admissibility_banner(out, mixed, {alpha});
        const Family fam = run_family(mixed, {alpha}, base, s.count("seeds"), s.count("jobs"));
        const auto ta = fam.ta_error(0, problem.theta_star);
        const std::string file = out.curve(
            "beta" + tag(beta), tag(alpha), {"k", "err_raw", "err_ta"}, columns_to_rows(fam.k, {fam.err_raw[0], ta}),
            {"instance=" + mixed.name, "beta=" + tag(beta) + " slem=" + fmt(lambda2) + " original_slem=" + fmt(slem),
             fam.aggregate_label()});
        fig.curves.push_back({"TA |l2|=" + tag(std::round(lambda2 * 1e4) / 1e4), file, "k", "err_ta"});
        labels.push_back("|l2|=" + tag(std::round(lambda2 * 1e4) / 1e4));
        plateaus.push_back(mlsa::plateau(fam.k, ta));
    }
    out.figure("lsa-slem", fig);
    print_plateaus("TA", labels, plateaus);
    return 0;
}

int td_rr6(const Settings& s) {
    const Instance inst = resolve_instance(s.str("instance"));
    const auto alphas = s.reals("alphas");
    if (alphas.size() < 2) throw ConfigError("td-rr6 needs at least two stepsizes");
    Output out(s, "td-rr6");
    admissibility_banner(out, inst, alphas);
    const Family fam = run_family(inst, alphas, run_config(s), s.count("seeds"), s.count("jobs"));
    const Vector& target = inst.problem.theta_star;
    const std::vector<std::string> extra{"instance=" + inst.name, fam.aggregate_label()};
    mlsa::FigureFile fig;
    fig.spec.title = "td-rr6: TA vs RR with m stepsizes";
    fig.spec.y_label = "error";
    double best_ta = INFINITY;
    for (std::size_t j = 0; j < alphas.size(); ++j) {
        const auto ta = fam.ta_error(j, target);
        const std::string file = out.curve("ta" + tag(alphas[j]), tag(alphas[j]), {"k", "err_ta"},
                                           columns_to_rows(fam.k, {ta}), extra);
        fig.curves.push_back({"TA a=" + tag(alphas[j]), file, "k", "err_ta"});
        std::printf("TA a=%-6s final %.6g\n", tag(alphas[j]).c_str(), ta.back());
        best_ta = std::min(best_ta, ta.back());
    }
    double last_rr = NAN;
    for (std::size_t m = 2; m <= alphas.size(); ++m) {
        std::vector<std::size_t> members(m);
        for (std::size_t i = 0; i < m; ++i) members[i] = i;
        const auto rr = fam.rr_error(members, target);
        const std::vector<double> used(alphas.begin(), alphas.begin() + static_cast<long>(m));
        const mlsa::RrScheme scheme = mlsa::rr_coefficients(used);
        const std::string file =
            out.curve("rr" + std::to_string(m), join(used, ";"), {"k", "err_rr"}, columns_to_rows(fam.k, {rr}),
                      {extra[0], extra[1], "sum_abs_h=" + fmt(scheme.sum_abs_h)});
        fig.curves.push_back({"RR m=" + std::to_string(m), file, "k", "err_rr"});
        std::printf("RR m=%zu final %.6g (sum|h| %.4g)\n", m, rr.back(), scheme.sum_abs_h);
        last_rr = rr.back();
    }
    out.figure("td-rr6", fig);
    std::printf("best TA / RR(m=%zu) = %.4g\n", alphas.size(), best_ta / last_rr);
    return 0;
}

mlsa::NoiseModel noise_model(const std::string& name) {
    if (name == "iid-uniform") return mlsa::NoiseModel::IidUniform;
    if (name == "sign-correlated") return mlsa::NoiseModel::SignCorrelated;
    if (name == "zero") return mlsa::NoiseModel::Zero;
    throw ConfigError("noise must be iid-uniform, sign-correlated or zero");
}

int sgd_figure(const Settings& s, const std::string& name) {
    const auto alphas = s.reals("alphas");
    Output out(s, name);
    mlsa::RegressionConfig c;
    c.noise = noise_model(s.str("noise"));
    c.theta_reg = Vector(2);
    const auto reg = s.reals("theta_reg");
    if (reg.size() != 2) throw ConfigError("theta_reg needs two entries");
    c.theta_reg << reg[0], reg[1];
    c.K = s.count("K");
    if (c.K < kMinK) throw ConfigError("K must be at least 1000");
    c.seed = s.u64("seed");
    c.k0_policy = s.k0_policy();
    c.k0 = s.fixed_k0();
    const std::size_t seeds = s.count("seeds"), jobs = s.count("jobs");
    const Vector target = mlsa::regression_target(c.noise, c.theta_reg);
    std::vector<std::string> extra{"noise=" + mlsa::to_string(c.noise),
                                   "target=analytic theta*=(" + fmt(target(0)) + "," + fmt(target(1)) + ")"};
    if (const std::size_t n = s.count("reference"); n > 0) {
        const auto ref = mlsa::reference_target(c.noise, c.theta_reg, n, c.seed);
        extra.push_back("reference estimate over " + std::to_string(ref.samples) + " MH samples: (" +
                        fmt(ref.theta(0)) + "," + fmt(ref.theta(1)) + ") se (" + fmt(ref.se(0)) + "," +
                        fmt(ref.se(1)) + ")");
    }
    const Family fam = regression_family(c, alphas, seeds, jobs);
    extra.push_back(fam.aggregate_label());
    mlsa::FigureFile fig;
    fig.spec.title = name + ": noise " + mlsa::to_string(c.noise);
    fig.spec.y_label = "error";
    std::vector<std::string> labels;
    std::vector<double> plateaus;
    for (std::size_t j = 0; j < alphas.size(); ++j) {
        const auto ta = fam.ta_error(j, target);
        const std::string file = out.curve("alpha" + tag(alphas[j]), tag(alphas[j]), {"k", "err_raw", "err_ta"},
                                           columns_to_rows(fam.k, {fam.err_raw[j], ta}), extra);
        fig.curves.push_back({"TA a=" + tag(alphas[j]), file, "k", "err_ta"});
        labels.push_back("a=" + tag(alphas[j]));
        plateaus.push_back(mlsa::plateau(fam.k, ta));
    }
    if (s.flag("rr")) {
        for (const auto& [i, j] : doubling_pairs(alphas)) {
            const auto rr = fam.rr_error({i, j}, target);
            const std::string file = out.curve("rr" + tag(alphas[i]) + "-" + tag(alphas[j]),
                                               tag(alphas[i]) + ";" + tag(alphas[j]), {"k", "err_rr"},
                                               columns_to_rows(fam.k, {rr}), extra);
            fig.curves.push_back({"RR a=" + tag(alphas[i]) + "," + tag(alphas[j]), file, "k", "err_rr"});
        }
    }
    if (s.has("diminishing")) {
        mlsa::RegressionConfig d = c;
        d.decay_power = s.real("decay");
        const double a0 = s.real("diminishing");
        const Family dim = regression_family(d, {a0}, seeds, jobs);
        const std::string file =
            out.curve("diminishing", tag(a0) + "/(k+1)^" + tag(d.decay_power), {"k", "err_raw"},
                      columns_to_rows(dim.k, {dim.err_raw[0]}), extra);
        fig.curves.push_back({"diminishing " + tag(a0) + "/k^" + tag(d.decay_power), file, "k", "err_raw"});
    }
    out.figure(name, fig);
    print_plateaus("TA", labels, plateaus);
    return 0;
}

int sgd_nobias(const Settings& s) { return sgd_figure(s, "sgd-nobias"); }
int sgd_bias(const Settings& s) { return sgd_figure(s, "sgd-bias"); }

std::vector<std::string> vector_columns(const std::string& prefix, std::size_t d) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < d; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

int bias_report(const Settings& s) {
    const Instance inst = resolve_instance(s.str("instance"));
    const auto alphas = s.reals("alphas");
    const std::size_t order = s.count("order");
    const auto& p = inst.problem;
    Output out(s, "bias-report");
    const mlsa::BiasExpansion ex = mlsa::bias_expansion(p, inst.chain, order);
    const mlsa::ZeroBiasReport zb = mlsa::zero_bias_condition(p, inst.chain, 1e-10);
    const std::vector<std::string> extra{
        "instance=" + inst.name + " label=" + p.label, "xi_norm=" + fmt(ex.xi_norm),
        "zero_bias_condition=" + std::string(zb.holds ? "holds" : "fails") + " max_violation=" + fmt(zb.max_violation)};

    std::vector<std::string> cols{"alpha", "bias_norm", "truncated_norm", "series_bias_norm", "residual", "rcond"};
    for (const auto& c : vector_columns("bias_", p.d)) cols.push_back(c);
    std::vector<std::vector<double>> rows;
    std::printf("instance %s (n=%zu, d=%zu), ||Xi||_pi = %.6g, zero-bias condition %s (violation %.3g)\n",
                p.label.c_str(), p.n, p.d, ex.xi_norm, zb.holds ? "holds" : "fails", zb.max_violation);
    for (double a : alphas) {
        const auto sol = mlsa::exact_stationary_mean(p, inst.chain, a);
        double series = NAN;
        if (a * ex.xi_norm < 1.0) series = (mlsa::infinite_series_mean(ex, p, a) - p.theta_star).norm();
        std::vector<double> row{a, sol.bias.norm(), ex.truncated_bias(a, order).norm(), series, sol.residual, sol.rcond};
        for (Eigen::Index i = 0; i < sol.bias.size(); ++i) row.push_back(sol.bias(i));
        rows.push_back(row);
        std::printf("alpha %-8s |bias| %.6e  |sum_{i<=%zu} a^i B_i| %.6e  residual %.2e\n", tag(a).c_str(),
                    sol.bias.norm(), order, ex.truncated_bias(a, order).norm(), sol.residual);
    }
    out.curve("exact", join(alphas, ";"), cols, rows, extra);

    std::vector<std::string> bcols{"i", "norm_B"};
    for (const auto& c : vector_columns("B_", p.d)) bcols.push_back(c);
    std::vector<std::vector<double>> brows;
    for (std::size_t i = 0; i < ex.B.size(); ++i) {
        std::vector<double> row{static_cast<double>(i + 1), ex.B[i].norm()};
        for (Eigen::Index j = 0; j < ex.B[i].size(); ++j) row.push_back(ex.B[i](j));
        brows.push_back(row);
        std::printf("B(%zu) norm %.6e\n", i + 1, ex.B[i].norm());
    }
    out.curve("coefficients", "none", bcols, brows, extra);

    if (mlsa::spectral_report(inst.chain).reversible) {
        const auto bound = mlsa::reversible_bias_bound(p, inst.chain, ex, order);
        std::vector<std::vector<double>> rrows;
        for (const auto& r : bound.rows) {
            rrows.push_back({static_cast<double>(r.i), r.norm_B, r.bound, r.satisfied ? 1.0 : 0.0});
            std::printf("reversible bound i=%zu ||B|| %.4e <= %.4e %s\n", r.i, r.norm_B, r.bound,
                        r.satisfied ? "ok" : "VIOLATED");
        }
        out.curve("bound", "none", {"i", "norm_B", "bound", "satisfied"}, rrows,
                  {extra[0], "C=" + fmt(bound.C) + " gap=" + fmt(bound.gap)});
    } else {
        std::printf("chain is not reversible; bound table skipped\n");
    }
    return 0;
}

int sweep(const Settings& s) {
    const Instance inst = resolve_instance(s.str("instance"));
    auto alphas = s.reals("alphas");
    std::sort(alphas.begin(), alphas.end());
    const auto& p = inst.problem;
    Output out(s, "sweep");
    const mlsa::BiasExpansion ex = mlsa::bias_expansion(p, inst.chain, 1);
    std::vector<double> exact, plateau_est(alphas.size(), NAN);
    for (double a : alphas) exact.push_back(mlsa::exact_stationary_mean(p, inst.chain, a).bias.norm());
    std::string aggregate = "monte carlo disabled";
    if (s.flag("mc")) {
        admissibility_banner(out, inst, alphas);
        const Family fam = run_family(inst, alphas, run_config(s), s.count("seeds"), s.count("jobs"));
        for (std::size_t j = 0; j < alphas.size(); ++j) {
            plateau_est[j] = mlsa::plateau(fam.k, fam.ta_error(j, p.theta_star));
        }
        aggregate = fam.aggregate_label();
    }
    // Least-squares log-log slope of the exact bias over the smallest decade.
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
    for (std::size_t j = 0; j < alphas.size(); ++j) {
        if (alphas[j] > 10.0 * alphas.front() * (1 + 1e-12) || !(exact[j] > 0.0)) continue;
        const double x = std::log(alphas[j]), y = std::log(exact[j]);
        sx += x, sy += y, sxx += x * x, sxy += x * y, n += 1;
    }
    const double slope = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : NAN;
    std::vector<std::vector<double>> rows;
    for (std::size_t j = 0; j < alphas.size(); ++j) {
        rows.push_back({alphas[j], exact[j], alphas[j] * ex.B[0].norm(), plateau_est[j]});
        std::printf("alpha %-8s exact %.6e  alpha*|B1| %.6e  plateau %.6e\n", tag(alphas[j]).c_str(), exact[j],
                    alphas[j] * ex.B[0].norm(), plateau_est[j]);
    }
    std::printf("log-log slope of exact bias over the smallest decade: %.4f\n", slope);
    const std::string file =
        out.curve("table", join(alphas, ";"), {"alpha", "exact_bias_norm", "b1_prediction", "plateau_estimate"}, rows,
                  {"instance=" + inst.name + " label=" + p.label, aggregate, "smallest_decade_slope=" + fmt(slope)});
    mlsa::FigureFile fig;
    fig.spec.title = "sweep: " + p.label;
    fig.spec.x_label = "alpha";
    fig.spec.y_label = "bias";
    fig.curves = {{"exact", file, "alpha", "exact_bias_norm"},
                  {"alpha |B1|", file, "alpha", "b1_prediction"},
                  {"MC plateau", file, "alpha", "plateau_estimate"}};
    out.figure("sweep", fig);
    return 0;
}

}  // namespace

std::vector<Command> experiment_commands() {
    return {
        {"lsa-ta-rr", "raw, TA and RR errors on a random LSA instance with a diminishing baseline",
         common({{"instance", "random:89", "finite instance"},
                 {"alphas", "0.2,0.4,0.8", "constant stepsizes"},
                 {"diminishing", "0.2", "alpha0 of the diminishing baseline"},
                 {"decay", "0.75", "decay power of the diminishing baseline"}}),
         lsa_ta_rr},
        {"lsa-slem", "TA errors across interpolated kernels with evenly spaced |lambda2|",
         common({{"instance", "random:89", "finite instance"},
                 {"alpha", "0.8", "constant stepsize"},
                 {"betas", "0,0.25,0.5,0.75,1", "interpolation weights; |lambda2| scales with beta"}}),
         lsa_slem},
        {"td-ta-rr", "raw, TA and RR errors of TD(0) on the problematic MDP",
         common({{"instance", "td", "TD instance (td or td:MRP_FILE)"}, {"alphas", "0.5,1,2", "constant stepsizes"}}),
         td_ta_rr},
        {"td-rr6", "TA against RR with 2..m stepsizes for TD(0)",
         common({{"instance", "td", "TD instance (td or td:MRP_FILE)"},
                 {"alphas", "1.9,2.1,2.3,2.5,2.7,2.9", "stepsize grid"}}),
         td_rr6},
        {"sgd-nobias", "SGD on Markovian regression with independent noise",
         common({{"alphas", "0.01,0.02,0.04", "constant stepsizes"},
                 {"noise", "iid-uniform", "noise model"},
                 {"theta_reg", "0,0", "regression parameter"},
                 {"reference", "0", "MH samples for a Monte Carlo target estimate (0 disables)"},
                 {"rr", "0", "also write RR curves"},
                 {"diminishing", "0.01", "alpha0 of the diminishing baseline"},
                 {"decay", "0.75", "decay power of the diminishing baseline"}}),
         sgd_nobias},
        {"sgd-bias", "SGD on Markovian regression with covariate-correlated noise",
         common({{"alphas", "0.01,0.02,0.04", "constant stepsizes"},
                 {"noise", "sign-correlated", "noise model"},
                 {"theta_reg", "0,0", "regression parameter"},
                 {"reference", "1000000", "MH samples for a Monte Carlo target estimate (0 disables)"},
                 {"rr", "1", "also write RR curves"}}),
         sgd_bias},
        {"bias-report", "exact stationary bias, expansion coefficients and reversible bound",
         {{"instance", "two-state", "finite instance"},
          {"alphas", "0.01,0.02,0.05,0.1", "stepsizes"},
          {"order", "3", "number of expansion coefficients"},
          {"out", "out", "output directory"}},
         bias_report},
        {"sweep", "exact bias, first-order prediction and Monte Carlo plateau over a stepsize grid",
         common({{"instance", "two-state", "finite instance"},
                 {"alphas", "0.005,0.01,0.02,0.04,0.08", "stepsize grid"},
                 {"mc", "1", "run the Monte Carlo plateau column"}}),
         sweep},
    };
}

}  // namespace cli
