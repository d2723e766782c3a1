#pragma once

#include "mlsa/engine.hpp"
#include "mlsa/io.hpp"
#include "mlsa/plot.hpp"
#include "mlsa/sgd.hpp"
#include "mlsa/td.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cli {

using mlsa::Vector;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Param {
    std::string key;
    std::string value;
    std::string help;
};

/// Defaults, then a key=value config file, then command-line overrides.
class Settings {
public:
    explicit Settings(std::vector<Param> params) : params_(std::move(params)) {}

    void load_file(const std::string& path);
    void set(const std::string& key, const std::string& value);
    const std::vector<Param>& params() const { return params_; }

    bool has(const std::string& key) const;
    std::string str(const std::string& key) const;
    std::uint64_t u64(const std::string& key) const;
    std::size_t count(const std::string& key) const;
    double real(const std::string& key) const;
    std::vector<double> reals(const std::string& key) const;
    bool flag(const std::string& key) const;
    mlsa::K0Policy k0_policy() const;
    std::size_t fixed_k0() const;

    /// "key=value" pairs in declaration order, space separated.
    std::string echo() const;

private:
    const Param& find(const std::string& key) const;
    std::vector<Param> params_;
};

/// Finite instance named on the command line:
///   two-state[:p], random:SEED[:n:d], iid:SEED, constant-a:SEED,
///   td[:MRP_FILE], td-semi[:MRP_FILE], or a problem file path.
struct Instance {
    mlsa::FiniteChain chain;
    mlsa::LsaProblem problem;
    std::string name;
};
Instance resolve_instance(const std::string& spec);

/// CSV and figure writer for one experiment invocation.
class Output {
public:
    Output(const Settings& settings, std::string experiment);

    /// Writes `<experiment>_<curve>.csv` and returns its file name.
    std::string curve(const std::string& curve, const std::string& alpha, std::vector<std::string> columns,
                      std::vector<std::vector<double>> rows, const std::vector<std::string>& extra = {});
    void figure(const std::string& name, const mlsa::FigureFile& figure);
    void warn(const std::string& message);
    const std::string& dir() const { return dir_; }

private:
    const Settings& settings_;
    std::string experiment_;
    std::string dir_;
    std::vector<std::string> warnings_;
};

std::string fmt(double v);
std::string join(const std::vector<double>& values, const char* sep = ",");

/// Seed-aggregated curves for a family of stepsizes sharing each seed's data.
struct Family {
    std::vector<std::size_t> k;
    std::vector<double> alphas;
    std::vector<std::vector<double>> err_raw;          // mean over seeds
    std::vector<std::vector<Vector>> theta_bar;        // mean over seeds
    std::size_t seeds = 0;

    std::vector<double> ta_error(std::size_t j, const Vector& target) const;
    std::vector<double> rr_error(const std::vector<std::size_t>& members, const Vector& target) const;
    std::string aggregate_label() const;
};

Family run_family(const Instance& inst, const std::vector<double>& alphas, const mlsa::RunConfig& base,
                  std::size_t seeds, std::size_t jobs);
Family regression_family(const mlsa::RegressionConfig& base, const std::vector<double>& alphas,
                         std::size_t seeds, std::size_t jobs);

/// Warns on stepsizes failing the admissibility condition.
void admissibility_banner(Output& out, const Instance& inst, const std::vector<double>& alphas);

using Runner = int (*)(const Settings&);
struct Command {
    std::string name;
    std::string description;
    std::vector<Param> params;
    Runner run;
};
std::vector<Command> experiment_commands();
std::vector<Command> adhoc_commands();

}  // namespace cli
