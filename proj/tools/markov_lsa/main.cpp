#include "cli.hpp"

#include "mlsa/error.hpp"
#include "mlsa/version.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <memory>

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

int exit_code(mlsa::ErrorCode code) {
    switch (code) {
        case mlsa::ErrorCode::Diverged:
        case mlsa::ErrorCode::OracleSingular:
        case mlsa::ErrorCode::SeriesDivergent:
        case mlsa::ErrorCode::SpectralFailure:
        case mlsa::ErrorCode::MixingTimeout:
        case mlsa::ErrorCode::LyapunovFailure:
        case mlsa::ErrorCode::DegenerateStationary:
            return kNumericalError;
        default:
            return kConfigError;
    }
}

struct Bound {
    cli::Command command;
    CLI::App* app = nullptr;
    std::string config;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constant-stepsize linear stochastic approximation under Markovian data", "markov-lsa"};
    app.set_version_flag("--version", std::string(mlsa::build_tag()));
    app.require_subcommand(1);

    std::vector<std::unique_ptr<Bound>> bound;
    for (auto group : {cli::experiment_commands(), cli::adhoc_commands()}) {
        for (auto& c : group) {
            auto b = std::make_unique<Bound>();
            b->command = c;
            b->app = app.add_subcommand(c.name, c.description);
            b->app->add_option("--config", b->config, "key=value file; command-line flags override it");
            for (const auto& p : c.params) {
                b->values[p.key] = p.value;
                b->options[p.key] = b->app->add_option("--" + p.key, b->values[p.key], p.help);
                if (!p.value.empty()) b->options[p.key]->default_str(p.value);
            }
            bound.push_back(std::move(b));
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    for (const auto& b : bound) {
        if (!b->app->parsed()) continue;
        try {
            cli::Settings settings(b->command.params);
            if (!b->config.empty()) settings.load_file(b->config);
            for (const auto& [key, opt] : b->options) {
                if (opt->count() > 0) settings.set(key, b->values[key]);
            }
            return b->command.run(settings);
        } catch (const cli::ConfigError& e) {
            std::cerr << "config error: " << e.what() << '\n';
            return kConfigError;
        } catch (const mlsa::Error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return exit_code(e.code());
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kConfigError;
        }
    }
    return kConfigError;
}
