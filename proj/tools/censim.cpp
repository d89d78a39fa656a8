// censim: scenario-driven runner for the censorship-attack simulator and its
// equilibrium verifiers.
//
//   censim verify-ne scenarios/ne_n3.scenario --seed 7
//   censim sweep scenarios/sweep_n3.scenario --format csv --out rows.csv
//   censim schema
//
// Exit codes: 0 success, 2 parse error, 3 validation error, 4 failed
// verification (witnesses in the payload).

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "censim/runner.hpp"

namespace {

struct CommonOptions {
    std::string scenario_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::optional<std::string> format;
    std::string out_path;
};

void add_common(CLI::App* cmd, CommonOptions& options) {
    cmd->add_option("scenario", options.scenario_path, "scenario file")->required();
    cmd->add_option("--override", options.overrides, "key=value override (repeatable)");
    cmd->add_option("--seed", options.seed, "override the scenario seed");
    cmd->add_option("--trials", options.trials, "override the Monte Carlo trial count");
    cmd->add_option("--format", options.format, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--out", options.out_path, "write the report to a file instead of stdout");
}

int emit(const censim::RunReport& report, const std::string& out_path) {
    const std::string text = report.rendered();
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "cannot open output file '" << out_path << "'\n";
            return 1;
        }
        out << text;
    }
    return report.exit_code;
}

int run_command(const CommonOptions& options, censim::ExperimentKind kind, bool sweep) {
    std::vector<std::string> overrides = options.overrides;
    if (options.seed) overrides.push_back("seed=" + std::to_string(*options.seed));
    if (options.trials) overrides.push_back("trials=" + std::to_string(*options.trials));
    if (options.format) overrides.push_back("format=" + *options.format);

    const auto report = sweep
                            ? censim::run_scenario_file(options.scenario_path, overrides,
                                                        std::nullopt, true)
                            : censim::run_scenario_file(options.scenario_path, overrides, kind);
    return emit(report, options.out_path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rational censorship attack simulator and equilibrium verifier"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* help;
        censim::ExperimentKind kind;
        bool sweep;
    };
    const std::vector<Sub> subs = {
        {"simulate", "simulate block production under a regime", censim::ExperimentKind::Simulate, false},
        {"verify-ne", "check the truthful-responder Nash equilibrium", censim::ExperimentKind::VerifyNE, false},
        {"verify-spe", "check subgame perfection of the attack strategy", censim::ExperimentKind::VerifySPE, false},
        {"multi-contract", "resolve or verify the simultaneous-contract game", censim::ExperimentKind::MultiContract, false},
        {"reward-cm", "evaluate the reward-function countermeasure", censim::ExperimentKind::RewardCM, false},
        {"estimate-eta", "estimate the detectability threshold", censim::ExperimentKind::EstimateEta, false},
        {"sweep", "run a verifier over every power_grid scenario", censim::ExperimentKind::VerifyNE, true},
    };

    std::vector<CommonOptions> options(subs.size());
    std::vector<CLI::App*> commands;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].help);
        add_common(cmd, options[i]);
        commands.push_back(cmd);
    }
    CLI::App* schema_cmd =
        app.add_subcommand("schema", "print the JSON schema of all report payloads");

    CLI11_PARSE(app, argc, argv);

    if (schema_cmd->parsed()) {
        std::cout << censim::report_schema().dump(2) << "\n";
        return 0;
    }
    for (std::size_t i = 0; i < subs.size(); ++i)
        if (commands[i]->parsed()) return run_command(options[i], subs[i].kind, subs[i].sweep);
    return 1;
}
