#include "cli.hpp"

#include "mlsa/error.hpp"
#include "mlsa/extrapolation.hpp"
#include "mlsa/version.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, sep)) out.push_back(trim(part));
    return out;
}

double parse_real(const std::string& key, const std::string& text) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || *end || errno == ERANGE || !std::isfinite(v)) {
        throw ConfigError(key + ": '" + text + "' is not a finite number");
    }
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    const double v = parse_real(key, text);
    if (v < 0 || v != std::floor(v) || v > 1.8e19) {
        throw ConfigError(key + ": '" + text + "' is not a nonnegative integer");
    }
    return static_cast<std::uint64_t>(v);
}

std::string alpha_tag(double a) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", a);
    return buf;
}

mlsa::Mrp mrp_or_builtin(const std::string& path, std::optional<mlsa::FeatureMap>& features) {
    if (path.empty()) return mlsa::problematic_mrp();
    auto f = mlsa::load_mrp(path);
    features = f.features;
    return f.mrp;
}

}  // namespace

void Settings::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(number) + ": expected key=value");
        }
        try {
            set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + std::to_string(number) + ": " + e.what());
        }
    }
}

void Settings::set(const std::string& key, const std::string& value) {
    for (auto& p : params_) {
        if (p.key == key) {
            p.value = value;
            return;
        }
    }
    throw ConfigError("unknown key '" + key + "'");
}

const Param& Settings::find(const std::string& key) const {
    for (const auto& p : params_) {
        if (p.key == key) return p;
    }
    throw ConfigError("unknown key '" + key + "'");
}

bool Settings::has(const std::string& key) const {
    return std::any_of(params_.begin(), params_.end(), [&](const Param& p) { return p.key == key; });
}

std::string Settings::str(const std::string& key) const { return find(key).value; }
std::uint64_t Settings::u64(const std::string& key) const { return parse_u64(key, str(key)); }
std::size_t Settings::count(const std::string& key) const {
    return static_cast<std::size_t>(u64(key));
}
double Settings::real(const std::string& key) const { return parse_real(key, str(key)); }

std::vector<double> Settings::reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& part : split(str(key), ',')) out.push_back(parse_real(key, part));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

bool Settings::flag(const std::string& key) const {
    const std::string v = str(key);
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw ConfigError(key + ": expected 0 or 1");
}

mlsa::K0Policy Settings::k0_policy() const {
    if (!has("k0") || str("k0") == "half") return mlsa::K0Policy::Half;
    return mlsa::K0Policy::Fixed;
}

std::size_t Settings::fixed_k0() const { return k0_policy() == mlsa::K0Policy::Half ? 0 : count("k0"); }

std::string Settings::echo() const {
    std::string out;
    for (const auto& p : params_) {
        if (!out.empty()) out += ' ';
        out += p.key + "=" + p.value;
    }
    return out;
}

Instance resolve_instance(const std::string& spec) {
    const auto parts = split(spec, ':');
    const std::string& kind = parts.front();
    auto arg_u64 = [&](std::size_t i, std::uint64_t fallback) {
        return parts.size() > i ? parse_u64("instance", parts[i]) : fallback;
    };
    if (kind == "two-state") {
        const double p = parts.size() > 1 ? parse_real("instance", parts[1]) : 0.2;
        mlsa::Matrix P(2, 2);
        P << 1 - p, p, p, 1 - p;
        auto chain = mlsa::FiniteChain::from_kernel(P, "two-state");
        std::vector<mlsa::Matrix> A{mlsa::Matrix::Constant(1, 1, -1.0), mlsa::Matrix::Constant(1, 1, -0.5)};
        std::vector<Vector> b{Vector::Constant(1, 1.0), Vector::Constant(1, 0.0)};
        auto problem = mlsa::build_problem(chain, std::move(A), std::move(b), false, "two-state");
        return {std::move(chain), std::move(problem), spec};
    }
    if (kind == "random" || kind == "iid" || kind == "constant-a") {
        const std::uint64_t seed = arg_u64(1, 89);
        const std::size_t n = arg_u64(2, 8), d = arg_u64(3, 4);
        auto [chain, problem] = mlsa::random_problem(n, d, seed);
        if (kind == "iid") {
            const Vector& pi = chain.stationary();
            auto iid = mlsa::FiniteChain::from_kernel(Vector::Ones(pi.size()) * pi.transpose(), "iid");
            auto p = mlsa::build_problem(iid, problem.A, problem.b, false, "iid-" + problem.label);
            return {std::move(iid), std::move(p), spec};
        }
        if (kind == "constant-a") {
            auto p = mlsa::build_problem(chain, std::vector<mlsa::Matrix>(problem.n, problem.Abar), problem.b,
                                         false, "constant-a-" + problem.label);
            return {std::move(chain), std::move(p), spec};
        }
        return {std::move(chain), std::move(problem), spec};
    }
    if (kind == "td" || kind == "td-semi") {
        const std::string path = spec.size() > kind.size() + 1 ? spec.substr(kind.size() + 1) : "";
        std::optional<mlsa::FeatureMap> features;
        const mlsa::Mrp mrp = mrp_or_builtin(path, features);
        if (kind == "td-semi") {
            auto td = mlsa::semi_simulator_problem(mrp);
            return {std::move(td.chain), std::move(td.problem), spec};
        }
        auto td = mlsa::td_problem(mrp, features ? *features : mlsa::polynomial_features(mrp.nS));
        return {std::move(td.chain), std::move(td.problem), spec};
    }
    if (!std::filesystem::exists(spec)) throw ConfigError("unknown instance '" + spec + "'");
    auto [chain, problem] = mlsa::load_problem(spec);
    return {std::move(chain), std::move(problem), spec};
}

std::string fmt(double v) { return mlsa::format_double(v); }

std::string join(const std::vector<double>& values, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? sep : "") + alpha_tag(values[i]);
    return out;
}

Output::Output(const Settings& settings, std::string experiment)
    : settings_(settings), experiment_(std::move(experiment)), dir_(settings.str("out")) {
    std::filesystem::create_directories(dir_);
}

std::string Output::curve(const std::string& curve, const std::string& alpha, std::vector<std::string> columns,
                          std::vector<std::vector<double>> rows, const std::vector<std::string>& extra) {
    mlsa::CsvTable t;
    t.comments.push_back("markov-lsa " + std::string(mlsa::build_tag()));
    t.comments.push_back("experiment=" + experiment_ + " curve=" + curve);
    t.comments.push_back("seed=" + (settings_.has("seed") ? settings_.str("seed") : std::string("none")) +
                         ", alpha=" + alpha + ", k0_policy=" + mlsa::to_string(settings_.k0_policy()));
    for (const auto& e : extra) t.comments.push_back(e);
    t.comments.push_back("config: " + settings_.echo());
    for (const auto& w : warnings_) t.comments.push_back("warning: " + w);
    t.columns = std::move(columns);
    t.rows = std::move(rows);
    const std::string name = experiment_ + "_" + curve + ".csv";
    mlsa::save_csv(dir_ + "/" + name, t);
    return name;
}

void Output::figure(const std::string& name, const mlsa::FigureFile& figure) {
    const std::string spec = dir_ + "/" + name + ".fig";
    mlsa::write_figure_file(spec, figure);
    mlsa::render_figure(mlsa::read_figure_file(spec), dir_, dir_ + "/" + name + ".svg");
    std::cout << "wrote " << dir_ << "/" << name << ".svg\n";
}

void Output::warn(const std::string& message) {
    std::cerr << "WARNING: " << message << '\n';
    warnings_.push_back(message);
}

std::vector<double> Family::ta_error(std::size_t j, const Vector& target) const {
    std::vector<double> out;
    for (const auto& v : theta_bar[j]) out.push_back(v.allFinite() ? (v - target).norm() : NAN);
    return out;
}

std::vector<double> Family::rr_error(const std::vector<std::size_t>& members, const Vector& target) const {
    std::vector<double> a;
    for (std::size_t m : members) a.push_back(alphas[m]);
    const mlsa::RrScheme scheme = mlsa::rr_coefficients(a);
    std::vector<double> out;
    for (std::size_t c = 0; c < k.size(); ++c) {
        std::vector<Vector> v;
        for (std::size_t m : members) v.push_back(theta_bar[m][c]);
        const Vector rr = mlsa::rr_combine(v, scheme);
        out.push_back(rr.allFinite() ? (rr - target).norm() : NAN);
    }
    return out;
}

std::string Family::aggregate_label() const {
    return seeds == 1 ? "seeds=1 aggregate=single-run"
                      : "seeds=" + std::to_string(seeds) +
                            " aggregate=seed-mean-iterate (err_ta, err_rr); mean error (err_raw)";
}

namespace {

Family collect(std::vector<std::vector<mlsa::TrajectorySummary>> per_seed, const std::vector<double>& alphas) {
    for (const auto& runs : per_seed) {
        for (const auto& r : runs) {
            if (r.diverged) throw mlsa::DivergedError(r.diverged_at, r.alpha);
        }
    }
    Family f;
    f.alphas = alphas;
    f.seeds = per_seed.size();
    f.k = per_seed.front().front().k;
    const double n = static_cast<double>(f.seeds);
    for (std::size_t j = 0; j < alphas.size(); ++j) {
        std::vector<double> raw(f.k.size(), 0.0);
        std::vector<Vector> bar(f.k.size());
        for (std::size_t c = 0; c < f.k.size(); ++c) {
            bar[c] = Vector::Zero(per_seed[0][j].theta_bar[c].size());
            for (const auto& runs : per_seed) {
                raw[c] += runs[j].err_raw[c] / n;
                bar[c] += runs[j].theta_bar[c] / n;
            }
        }
        f.err_raw.push_back(std::move(raw));
        f.theta_bar.push_back(std::move(bar));
    }
    return f;
}

}  // namespace

Family run_family(const Instance& inst, const std::vector<double>& alphas, const mlsa::RunConfig& base,
                  std::size_t seeds, std::size_t jobs) {
    if (seeds == 0) throw ConfigError("seeds must be positive");
    std::vector<std::vector<mlsa::TrajectorySummary>> per_seed(seeds);
    mlsa::parallel_for(seeds, jobs, [&](std::size_t s) {
        mlsa::RunConfig c = base;
        c.seed = base.seed + s;
        per_seed[s] = mlsa::simulate_multi(inst.problem, inst.chain, alphas, c, 1);
    });
    return collect(std::move(per_seed), alphas);
}

Family regression_family(const mlsa::RegressionConfig& base, const std::vector<double>& alphas,
                         std::size_t seeds, std::size_t jobs) {
    if (seeds == 0) throw ConfigError("seeds must be positive");
    std::vector<std::vector<mlsa::TrajectorySummary>> per_seed(seeds);
    mlsa::parallel_for(seeds, jobs, [&](std::size_t s) {
        mlsa::RegressionConfig c = base;
        c.seed = base.seed + s;
        per_seed[s] = mlsa::regression_multi(c, alphas);
    });
    return collect(std::move(per_seed), alphas);
}

void admissibility_banner(Output& out, const Instance& inst, const std::vector<double>& alphas) {
    const mlsa::LyapunovCert cert = mlsa::lyapunov_certificate(inst.problem);
    for (double a : alphas) {
        const auto r = mlsa::stepsize_admissible(inst.problem, inst.chain, a, cert);
        if (!r.admissible) {
            out.warn("alpha=" + alpha_tag(a) + " is not admissible (alpha*tau=" + fmt(r.product) +
                     " >= " + fmt(r.bound) + "); guarantees do not apply");
        }
    }
}

}  // namespace cli
