#pragma once

// Experiment dispatch: turns a parsed Scenario into a RunReport with a
// machine-readable payload and the documented exit code.
//
// Exit codes: 0 success, 2 parse error, 3 validation error (including
// scenarios outside a theorem's assumptions), 4 verification failure
// (a verifier returned witnesses, or winner uniqueness was violated).

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "censim/scenario.hpp"
#include "censim/schema.hpp"
#include "censim/serialize.hpp"

namespace censim {

inline constexpr std::string_view kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitVerification = 4;

struct RunReport {
    std::string scenario_name;
    std::string kind;
    double duration_ms = 0.0;
    std::uint64_t seed = 0;
    json payload;
    int exit_code = kExitOk;
    bool csv_output = false;
    std::string csv;

    json envelope() const {
        return json{{"scenario", scenario_name}, {"kind", kind},
                    {"duration_ms", duration_ms}, {"seed", seed},
                    {"version", std::string(kVersion)}, {"payload", payload}};
    }

    // What goes to stdout / --out. CSV payloads are emitted raw; everything
    // else is the JSON envelope. The payload (not the envelope) is the
    // reproducibility contract: duration_ms varies run to run.
    std::string rendered() const { return csv_output ? csv : envelope().dump(2) + "\n"; }
};

namespace detail {

inline json error_payload(const char* stage, const std::string& message) {
    return json{{"stage", stage}, {"message", message}};
}

inline json scenario_header(const PowerDistribution& powers, const ProtocolParams& params) {
    json power_list = json::array();
    for (const auto& p : powers.powers()) power_list.push_back(p.str());
    return json{{"powers", power_list},
                {"t", params.t.str()},
                {"eta", params.eta},
                {"alpha", params.alpha.str()},
                {"epsilon", params.epsilon().str()}};
}

inline const PowerDistribution& require_powers(const Scenario& s) {
    if (!s.powers) throw ValidationError("scenario requires a 'powers' list");
    return *s.powers;
}

inline void require_runnable(const PowerDistribution& powers, const ProtocolParams& params) {
    const auto report = validate_scenario(powers, params);
    if (report.runnable()) return;
    std::string joined;
    for (const auto& issue : report.issues) {
        if (!joined.empty()) joined += "; ";
        joined += issue.message;
    }
    throw ValidationError(joined);
}

inline GameSpec game_spec_of(const Scenario& s) {
    const auto& powers = require_powers(s);
    require_runnable(powers, s.params);
    GameSpec spec{powers, s.params, s.launcher};
    spec.order_distribution = s.order;
    spec.trials = s.trials;
    spec.seed = s.seed;
    spec.reward = s.reward;
    spec.reward_basis = s.reward_basis;
    return spec;
}

inline MultiContractSpec multi_spec_of(const Scenario& s) {
    const auto& powers = require_powers(s);
    require_runnable(powers, s.params);
    MultiContractSpec spec;
    spec.k = s.k;
    spec.launchers = s.launchers;
    if (spec.launchers.empty())
        for (std::size_t j = 0; j < s.k; ++j) spec.launchers.push_back(static_cast<NodeId>(j));
    spec.powers = powers;
    spec.params = s.params;
    spec.join_model = s.join_model;
    spec.join_coalition = s.join_coalition;
    spec.actions = s.join_actions;
    spec.seed = s.seed;
    spec.trials = s.trials;
    spec.allow_launcher_moves = s.allow_launcher_moves;
    return spec;
}

inline void run_simulate(const Scenario& s, RunReport& report) {
    const auto& powers = require_powers(s);
    require_runnable(powers, s.params);

    AttackRegime regime;
    if (!s.coalition.empty()) {
        regime.active = true;
        regime.coalition = s.coalition;
        regime.trigger_block = s.trigger_block;
        for (NodeId node : s.coalition)
            if (static_cast<std::size_t>(node) >= powers.n())
                throw ValidationError("coalition node id out of range");
    }
    const std::size_t excluded =
        s.excluded_count.value_or(regime.active ? powers.n() - regime.coalition.size() : 0);

    ChainConfig config{powers, s.params, s.horizon, s.reward, s.seed};
    const RewardLedger ledger = simulate_horizon(config, regime, excluded);
    const auto expected = expected_ledger(config, regime);

    json expected_json = json::array();
    for (const auto& u : expected) expected_json.push_back(u.str());
    report.payload = json{
        {"ledger", ledger_to_json(ledger, powers)},
        {"expected", expected_json},
        {"excluded_count", excluded},
        {"regime", json{{"active", regime.active},
                        {"coalition", regime.coalition},
                        {"trigger_block", regime.trigger_block}}},
    };
    if (s.format == OutputFormat::Csv) {
        report.csv_output = true;
        report.csv = ledger_to_csv(ledger, powers);
    }
}

inline void run_verify_ne(const Scenario& s, RunReport& report) {
    const GameSpec spec = game_spec_of(s);
    if (spec.order_distribution != OrderDistribution::UniformExact)
        throw ValidationError("verification requires order = exact");
    const NeResult result = verify_ne_subgame(spec);
    report.payload = json{
        {"scenario", scenario_header(spec.powers, spec.params)},
        {"holds", result.holds},
        {"witnesses", to_json(result, spec.powers.grid())["witnesses"]},
        {"enumeration_stats", to_json(result.stats)},
    };
    if (!result.holds) report.exit_code = kExitVerification;
}

inline void run_verify_spe(const Scenario& s, RunReport& report) {
    const GameSpec spec = game_spec_of(s);
    if (spec.order_distribution != OrderDistribution::UniformExact)
        throw ValidationError("verification requires order = exact");
    const SpeResult result = verify_spe(spec);
    json witnesses = json::array();
    for (const auto& w : result.subgame.witnesses)
        witnesses.push_back(to_json(w, spec.powers.grid()));
    report.payload = json{
        {"scenario", scenario_header(spec.powers, spec.params)},
        {"holds", result.holds},
        {"witnesses", witnesses},
        {"enumeration_stats", to_json(result.subgame.stats)},
        {"launcher_attack_utility", result.launcher_attack_utility.str()},
        {"launcher_honest_utility", result.launcher_honest_utility.str()},
        {"strict", result.launcher_strictly_prefers_attack},
    };
    if (!result.holds) report.exit_code = kExitVerification;
}

inline void run_multi_contract(const Scenario& s, RunReport& report) {
    const MultiContractSpec spec = multi_spec_of(s);
    json payload{{"scenario", scenario_header(spec.powers, spec.params)}};

    switch (spec.join_model) {
    case JoinModel::AllJoinCoalition: {
        const auto result = verify_multi_contract_ne(spec);
        if (!result.assumptions_hold)
            throw ValidationError("outside theorem assumptions: " + result.note);
        payload["mode"] = "verify-ne";
        payload.update(to_json(result));
        report.payload = payload;
        if (!result.holds) report.exit_code = kExitVerification;
        return;
    }
    case JoinModel::UniformRandom: {
        const auto probabilities = win_probability(spec);
        payload["mode"] = "win-probability";
        payload.update(to_json(probabilities));
        report.payload = payload;
        return;
    }
    case JoinModel::ExplicitProfile:
    case JoinModel::JoinAllCoalitionsDemo: {
        const auto winner = resolve_multi_contract(spec);
        payload["mode"] = "resolve";
        payload.update(to_json(winner));
        report.payload = payload;
        if (winner.uniqueness_violated) report.exit_code = kExitVerification;
        return;
    }
    }
}

inline void run_reward_cm(const Scenario& s, RunReport& report) {
    const auto& powers = require_powers(s);
    require_runnable(powers, s.params);

    const auto partition = check_unprofitability_condition(s.reward, s.params, powers.n());
    json payload{
        {"scenario", scenario_header(powers, s.params)},
        {"reward", s.reward.describe()},
        {"condition", json{{"satisfied_for", partition.satisfied_for},
                           {"violated_for", partition.violated_for}}},
    };
    if (!s.coalition.empty()) {
        const auto entries =
            attack_profitability_under_reward(s.reward, powers, s.params, s.coalition);
        json rows = json::array();
        for (const auto& entry : entries) rows.push_back(to_json(entry));
        payload["profitability"] = rows;
    }
    report.payload = payload;
}

inline void run_estimate_eta(const Scenario& s, RunReport& report) {
    const auto estimate = estimate_eta(s.latency_blocks, s.history, s.z);
    report.payload = json{
        {"eta", estimate.eta},
        {"eta_latency", estimate.eta_latency},
        {"eta_variance", estimate.eta_variance},
        {"history_points", s.history.size()},
        {"latency_blocks", s.latency_blocks},
        {"z", s.z},
    };
}

} // namespace detail

template <typename Body>
RunReport guarded_run(const Scenario& s, const std::string& kind, Body&& body) {
    RunReport report;
    report.scenario_name = s.name;
    report.kind = kind;
    report.seed = s.seed;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(report);
    } catch (const ParseError& e) {
        report.kind = "error";
        report.exit_code = kExitParse;
        report.payload = detail::error_payload("parse", e.what());
        report.csv_output = false;
    } catch (const ValidationError& e) {
        report.kind = "error";
        report.exit_code = kExitValidation;
        report.payload = detail::error_payload("validation", e.what());
        report.csv_output = false;
    } catch (const std::invalid_argument& e) {
        // domain invariants surface as validation failures
        report.kind = "error";
        report.exit_code = kExitValidation;
        report.payload = detail::error_payload("validation", e.what());
        report.csv_output = false;
    }
    report.duration_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    return report;
}

inline RunReport run_scenario(const Scenario& s) {
    return guarded_run(s, experiment_name(s.kind), [&](RunReport& report) {
        switch (s.kind) {
        case ExperimentKind::Simulate: return detail::run_simulate(s, report);
        case ExperimentKind::VerifyNE: return detail::run_verify_ne(s, report);
        case ExperimentKind::VerifySPE: return detail::run_verify_spe(s, report);
        case ExperimentKind::MultiContract: return detail::run_multi_contract(s, report);
        case ExperimentKind::RewardCM: return detail::run_reward_cm(s, report);
        case ExperimentKind::EstimateEta: return detail::run_estimate_eta(s, report);
        }
        throw ValidationError("unknown experiment kind");
    });
}

// Runs the scenario's verification experiment on every power_grid
// distribution; one deterministic row per scenario.
inline RunReport run_sweep(const Scenario& s) {
    return guarded_run(s, "sweep", [&](RunReport& report) {
        if (!s.grid_n) throw ValidationError("sweep requires grid_n");
        if (s.kind != ExperimentKind::VerifyNE && s.kind != ExperimentKind::VerifySPE)
            throw ValidationError("sweep supports experiment = verify-ne or verify-spe");
        if (*s.grid_n < 2) throw ValidationError("sweep requires grid_n >= 2");
        if (*s.grid_n - 1 > 8)
            throw ValidationError("sweep grid exceeds the exact-enumeration responder cap");

        const auto grid = power_grid(*s.grid_n, s.params.grid, s.params);
        if (grid.empty())
            throw ValidationError("sweep grid is empty: no distribution satisfies the validator");

        json rows = json::array();
        std::string csv =
            "index,powers,holds,launcher_utility,honest_utility,strict,witnesses\n";
        bool all_hold = true;
        for (std::size_t idx = 0; idx < grid.size(); ++idx) {
            ProtocolParams params = s.params;
            params.eta = s.eta_given ? s.params.eta : static_cast<int>(grid[idx].n());
            GameSpec spec{grid[idx], params, s.launcher};
            spec.reward = s.reward;
            spec.reward_basis = s.reward_basis;

            const SpeResult result = verify_spe(spec);
            const bool holds =
                s.kind == ExperimentKind::VerifyNE ? result.subgame.holds : result.holds;
            all_hold = all_hold && holds;

            std::string power_list;
            for (NodeId i = 0; i < grid[idx].n(); ++i) {
                if (i) power_list += "|";
                power_list += grid[idx].power(i).str();
            }
            rows.push_back(json{
                {"index", idx},
                {"powers", power_list},
                {"holds", holds},
                {"launcher_utility", result.launcher_attack_utility.str()},
                {"honest_utility", result.launcher_honest_utility.str()},
                {"strict", result.launcher_strictly_prefers_attack},
                {"witnesses", result.subgame.witnesses.size()},
            });
            csv += std::to_string(idx) + "," + power_list + "," +
                   (holds ? "true" : "false") + "," +
                   result.launcher_attack_utility.str() + "," +
                   result.launcher_honest_utility.str() + "," +
                   (result.launcher_strictly_prefers_attack ? "true" : "false") + "," +
                   std::to_string(result.subgame.witnesses.size()) + "\n";
        }
        report.payload = json{{"rows", rows}};
        if (s.format == OutputFormat::Csv) {
            report.csv_output = true;
            report.csv = csv;
        }
        if (!all_hold) report.exit_code = kExitVerification;
    });
}

// Loads, applies overrides, optionally forces the experiment kind (CLI
// subcommands do this), and runs. Parse failures yield an exit-2 report.
inline RunReport run_scenario_file(const std::string& path,
                                   const std::vector<std::string>& overrides = {},
                                   std::optional<ExperimentKind> forced_kind = std::nullopt,
                                   bool sweep_mode = false) {
    Scenario scenario;
    try {
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open scenario file '" + path + "'");
        std::stringstream buffer;
        buffer << in.rdbuf();
        auto kv = parse_key_values(buffer.str());
        for (const auto& entry : overrides) {
            const auto eq = entry.find('=');
            if (eq == std::string::npos)
                throw ParseError("override '" + entry + "' is not key=value");
            const std::string key = detail::trim(entry.substr(0, eq));
            if (!detail::known_keys().count(key))
                throw ParseError("override uses unknown key '" + key + "'");
            kv[key] = detail::trim(entry.substr(eq + 1));
        }
        if (forced_kind) {
            const std::string forced = experiment_name(*forced_kind);
            auto it = kv.find("experiment");
            if (it != kv.end() && it->second != forced)
                throw ParseError("scenario experiment '" + it->second +
                                 "' does not match subcommand '" + forced + "'");
            kv["experiment"] = forced;
        }
        scenario = interpret_scenario(kv);
    } catch (const ParseError& e) {
        RunReport report;
        report.scenario_name = path;
        report.kind = "error";
        report.exit_code = kExitParse;
        report.payload = detail::error_payload("parse", e.what());
        return report;
    } catch (const ValidationError& e) {
        RunReport report;
        report.scenario_name = path;
        report.kind = "error";
        report.exit_code = kExitValidation;
        report.payload = detail::error_payload("validation", e.what());
        return report;
    }
    return sweep_mode ? run_sweep(scenario) : run_scenario(scenario);
}

} // namespace censim
