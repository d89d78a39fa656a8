#pragma once

// Declarative scenario files: flat `key = value` lines, `#` comments.
// Unknown keys are rejected so typos fail loudly instead of silently running
// a different experiment.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "censim/core.hpp"
#include "censim/countermeasures.hpp"
#include "censim/game.hpp"
#include "censim/reward.hpp"

namespace censim {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind { Simulate, VerifyNE, VerifySPE, MultiContract, RewardCM, EstimateEta };

inline const char* experiment_name(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::Simulate: return "simulate";
    case ExperimentKind::VerifyNE: return "verify-ne";
    case ExperimentKind::VerifySPE: return "verify-spe";
    case ExperimentKind::MultiContract: return "multi-contract";
    case ExperimentKind::RewardCM: return "reward-cm";
    case ExperimentKind::EstimateEta: return "estimate-eta";
    }
    return "?";
}

enum class OutputFormat { Json, Csv };

struct Scenario {
    std::string name = "unnamed";
    ExperimentKind kind = ExperimentKind::Simulate;
    OutputFormat format = OutputFormat::Json;

    // either explicit powers or a grid spec (sweep)
    std::optional<PowerDistribution> powers;
    std::optional<std::size_t> grid_n;

    ProtocolParams params;
    bool eta_given = false; // defaults to n (undetectable regime) otherwise

    NodeId launcher = 0;
    OrderDistribution order = OrderDistribution::UniformExact;
    RewardBasis reward_basis = RewardBasis::TruePower;
    RewardFunction reward = RewardFunction::constant(Rat{1});
    std::uint64_t seed = 0;
    std::uint64_t trials = 100000;

    // simulate
    std::int64_t horizon = 100000;
    std::vector<NodeId> coalition;
    std::int64_t trigger_block = 0;
    std::optional<std::size_t> excluded_count;

    // multi-contract
    std::size_t k = 2;
    std::vector<NodeId> launchers;
    JoinModel join_model = JoinModel::AllJoinCoalition;
    std::size_t join_coalition = 0;
    std::vector<int> join_actions;
    bool allow_launcher_moves = false;

    // estimate-eta
    int latency_blocks = 0;
    double z = 3.0;
    std::vector<double> history;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline std::int64_t parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        std::int64_t v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ParseError("key '" + key + "': expected an integer, got '" + value + "'");
    }
}

inline double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ParseError("key '" + key + "': expected a number, got '" + value + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ParseError("key '" + key + "': expected true/false, got '" + value + "'");
}

inline Rat parse_rat(const std::string& key, const std::string& value) {
    try {
        return Rat::parse(value);
    } catch (const std::exception& e) {
        throw ParseError("key '" + key + "': " + e.what());
    }
}

inline RewardFunction parse_reward(const std::string& value) {
    const auto colon = value.find(':');
    const std::string head = colon == std::string::npos ? value : value.substr(0, colon);
    const std::string tail = colon == std::string::npos ? "" : value.substr(colon + 1);
    try {
        if (head == "constant") return RewardFunction::constant(Rat::parse(tail));
        if (head == "linear") return RewardFunction::linear(Rat::parse(tail));
        if (head == "table") {
            std::vector<Rat> values;
            for (const auto& item : split_list(tail)) values.push_back(Rat::parse(item));
            return RewardFunction::table(std::move(values));
        }
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError("key 'reward': " + std::string(e.what()));
    }
    throw ParseError("key 'reward': expected constant:<r>, linear:<r> or table:<r,...>");
}

inline std::vector<double> load_history_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open history csv '" + path + "'");
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        const auto cells = split_list(line);
        if (cells.empty()) continue;
        try {
            std::size_t pos = 0;
            double v = std::stod(cells.front(), &pos);
            if (pos != cells.front().size()) continue; // header or junk line
            values.push_back(v);
        } catch (const std::exception&) {
            continue; // header line
        }
    }
    return values;
}

inline const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "name",           "experiment",   "powers",        "grid_n",
        "epsilon",        "t",            "eta",           "alpha",
        "timeout",        "policy",       "seed",          "trials",
        "format",         "launcher",     "order",         "reward_basis",
        "reward",         "horizon",      "coalition",     "trigger_block",
        "excluded_count", "k",            "launchers",     "join_model",
        "join_coalition", "join_actions", "allow_launcher_moves",
        "latency_blocks", "z",            "history",       "history_csv",
    };
    return keys;
}

} // namespace detail

// First pass: raw key/value map (unknown keys rejected, duplicates rejected).
inline std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> out;
    std::stringstream ss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (!detail::known_keys().count(key))
            throw ParseError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        if (out.count(key))
            throw ParseError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        out[key] = value;
    }
    return out;
}

inline ExperimentKind parse_experiment(const std::string& value) {
    for (ExperimentKind kind :
         {ExperimentKind::Simulate, ExperimentKind::VerifyNE, ExperimentKind::VerifySPE,
          ExperimentKind::MultiContract, ExperimentKind::RewardCM, ExperimentKind::EstimateEta})
        if (value == experiment_name(kind)) return kind;
    throw ParseError("unknown experiment '" + value + "'");
}

// Second pass: interpret the map. Overrides (already merged) behave exactly
// like file keys.
inline Scenario interpret_scenario(const std::map<std::string, std::string>& kv) {
    using detail::parse_bool;
    using detail::parse_double;
    using detail::parse_int;
    using detail::parse_rat;

    Scenario s;
    auto get = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };

    if (auto v = get("name")) s.name = *v;
    if (auto v = get("experiment")) s.kind = parse_experiment(*v);

    if (auto v = get("epsilon")) {
        const Rat eps = parse_rat("epsilon", *v);
        if (eps.num() != 1 || eps.den() < 1)
            throw ParseError("epsilon must be the reciprocal of a positive integer");
        s.params.grid = eps.den();
    }
    if (auto v = get("t")) s.params.t = parse_rat("t", *v);
    if (auto v = get("alpha")) s.params.alpha = parse_rat("alpha", *v);
    if (auto v = get("timeout")) s.params.timeout_blocks = parse_int("timeout", *v);
    if (auto v = get("eta")) {
        s.params.eta = static_cast<int>(parse_int("eta", *v));
        s.eta_given = true;
    }
    if (auto v = get("policy")) {
        if (*v == "power-only")
            s.params.policy = TerminationPolicy::PowerOnly;
        else if (*v == "power-and-visibility")
            s.params.policy = TerminationPolicy::PowerAndVisibility;
        else
            throw ParseError("policy must be power-only or power-and-visibility");
    }

    if (auto v = get("powers")) {
        std::vector<double> fractions;
        for (const auto& item : detail::split_list(*v))
            fractions.push_back(parse_double("powers", item));
        try {
            s.powers = PowerDistribution::from_fractions(fractions, s.params.grid);
        } catch (const std::exception& e) {
            throw ValidationError(e.what());
        }
    }
    if (auto v = get("grid_n")) s.grid_n = static_cast<std::size_t>(parse_int("grid_n", *v));

    if (auto v = get("launcher")) s.launcher = static_cast<NodeId>(parse_int("launcher", *v));
    if (auto v = get("order")) {
        if (*v == "exact")
            s.order = OrderDistribution::UniformExact;
        else if (*v == "sampled")
            s.order = OrderDistribution::UniformSampled;
        else
            throw ParseError("order must be exact or sampled");
    }
    if (auto v = get("reward_basis")) {
        if (*v == "true-power")
            s.reward_basis = RewardBasis::TruePower;
        else if (*v == "declared-power")
            s.reward_basis = RewardBasis::DeclaredPower;
        else
            throw ParseError("reward_basis must be true-power or declared-power");
    }
    if (auto v = get("reward")) s.reward = detail::parse_reward(*v);
    if (auto v = get("seed")) s.seed = static_cast<std::uint64_t>(parse_int("seed", *v));
    if (auto v = get("trials")) s.trials = static_cast<std::uint64_t>(parse_int("trials", *v));
    if (auto v = get("format")) {
        if (*v == "json")
            s.format = OutputFormat::Json;
        else if (*v == "csv")
            s.format = OutputFormat::Csv;
        else
            throw ParseError("format must be json or csv");
    }

    if (auto v = get("horizon")) s.horizon = parse_int("horizon", *v);
    if (auto v = get("coalition"))
        for (const auto& item : detail::split_list(*v))
            s.coalition.push_back(static_cast<NodeId>(parse_int("coalition", item)));
    if (auto v = get("trigger_block")) s.trigger_block = parse_int("trigger_block", *v);
    if (auto v = get("excluded_count"))
        s.excluded_count = static_cast<std::size_t>(parse_int("excluded_count", *v));

    if (auto v = get("k")) s.k = static_cast<std::size_t>(parse_int("k", *v));
    if (auto v = get("launchers"))
        for (const auto& item : detail::split_list(*v))
            s.launchers.push_back(static_cast<NodeId>(parse_int("launchers", item)));
    if (auto v = get("join_model")) {
        if (*v == "all-join")
            s.join_model = JoinModel::AllJoinCoalition;
        else if (*v == "uniform")
            s.join_model = JoinModel::UniformRandom;
        else if (*v == "explicit")
            s.join_model = JoinModel::ExplicitProfile;
        else if (*v == "join-all-demo")
            s.join_model = JoinModel::JoinAllCoalitionsDemo;
        else
            throw ParseError("join_model must be all-join, uniform, explicit or join-all-demo");
    }
    if (auto v = get("join_coalition"))
        s.join_coalition = static_cast<std::size_t>(parse_int("join_coalition", *v));
    if (auto v = get("join_actions"))
        for (const auto& item : detail::split_list(*v))
            s.join_actions.push_back(static_cast<int>(parse_int("join_actions", item)));
    if (auto v = get("allow_launcher_moves"))
        s.allow_launcher_moves = parse_bool("allow_launcher_moves", *v);

    if (auto v = get("latency_blocks"))
        s.latency_blocks = static_cast<int>(parse_int("latency_blocks", *v));
    if (auto v = get("z")) s.z = parse_double("z", *v);
    if (auto v = get("history"))
        for (const auto& item : detail::split_list(*v))
            s.history.push_back(parse_double("history", item));
    if (auto v = get("history_csv")) {
        auto loaded = detail::load_history_csv(*v);
        s.history.insert(s.history.end(), loaded.begin(), loaded.end());
    }

    // eta defaults to n: undetectable regime unless the scenario says otherwise
    if (!s.eta_given && s.powers) s.params.eta = static_cast<int>(s.powers->n());

    return s;
}

inline Scenario parse_scenario(const std::string& text,
                               const std::vector<std::string>& overrides = {}) {
    auto kv = parse_key_values(text);
    for (const auto& entry : overrides) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            throw ParseError("override '" + entry + "' is not key=value");
        const std::string key = detail::trim(entry.substr(0, eq));
        if (!detail::known_keys().count(key))
            throw ParseError("override uses unknown key '" + key + "'");
        kv[key] = detail::trim(entry.substr(eq + 1));
    }
    return interpret_scenario(kv);
}

inline Scenario load_scenario(const std::string& path,
                              const std::vector<std::string>& overrides = {}) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str(), overrides);
}

} // namespace censim
