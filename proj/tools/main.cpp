// fekete-field: batch CLI over the electrostatics library. Every subcommand
// writes its artifacts plus a run.json manifest into --out; outputs are
// byte-reproducible for a fixed config and seed.

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "fekete/cli.hpp"

namespace {

struct SubcommandState {
    CLI::App* app = nullptr;
    std::map<std::string, std::string> values;
    std::string config_file;
    std::string out_dir;
    std::uint64_t seed = 0;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fekete-field: point-charge equilibria, image-charge solutions and "
                 "potential field scans"};
    app.require_subcommand(0, 1);

    std::map<std::string, SubcommandState> states;
    for (const auto& spec : fekete::cli::command_table()) {
        auto& state = states[spec.name];
        state.app = app.add_subcommand(spec.name, spec.help);
        for (const auto& param : spec.params) {
            const std::string flag = "--" + param.name;
            std::string help = param.help;
            if (!param.default_value.empty()) help += " [default: " + param.default_value + "]";
            state.app->add_option(flag, state.values[param.name], help);
        }
        state.app->add_option("--config", state.config_file,
                              "JSON scenario file; explicit flags override its values");
        state.app->add_option("--out", state.out_dir, "output directory [default: .]");
        state.app->add_option("--seed", state.seed, "random seed [default: 0]");
    }

    CLI11_PARSE(app, argc, argv);

    const CLI::App* chosen = nullptr;
    const fekete::cli::CommandSpec* chosen_spec = nullptr;
    for (const auto& spec : fekete::cli::command_table()) {
        if (states[spec.name].app->parsed()) {
            chosen = states[spec.name].app;
            chosen_spec = &spec;
        }
    }
    if (!chosen) {
        std::cerr << app.help() << "\n";
        return fekete::cli::exit_validation;
    }

    fekete::cli::ScenarioConfig config;
    const SubcommandState& state = states.at(chosen_spec->name);
    try {
        if (!state.config_file.empty())
            config = fekete::cli::load_config_file(state.config_file);
    } catch (const std::exception& e) {
        std::cerr << "config error: config: " << e.what() << "\n";
        return fekete::cli::exit_validation;
    }
    config.command = chosen_spec->name;
    for (const auto& param : chosen_spec->params) {
        if (chosen->count("--" + param.name) > 0)
            config.parameters[param.name] = state.values.at(param.name);
    }
    if (chosen->count("--out") > 0) config.output_dir = state.out_dir;
    if (chosen->count("--seed") > 0) config.seed = state.seed;

    return fekete::cli::run(config, std::cerr);
}
