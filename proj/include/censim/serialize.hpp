#pragma once

// JSON and CSV views of the result types. Exact rationals are serialized as
// "num/den" strings so payloads stay byte-reproducible and lossless; doubles
// appear alongside where a numeric column is the natural consumer format.

#include <string>
#include <vector>

#include <json.hpp>

#include "censim/chain.hpp"
#include "censim/core.hpp"
#include "censim/countermeasures.hpp"
#include "censim/cta.hpp"
#include "censim/game.hpp"

namespace censim {

using nlohmann::json;

inline json to_json(const Rat& r) { return r.str(); }

inline json to_json(const Action& a, PowerUnits grid) {
    if (!a.join) return json{{"kind", "noop"}};
    return json{{"kind", "declare"}, {"power", Rat{a.declared, grid}.str()}};
}

inline json to_json(const OutcomeRecord& record, std::uint64_t seed) {
    json order = json::array();
    for (NodeId node : record.order_used.nodes) order.push_back(node);
    return json{
        {"success", record.success},
        {"coalition", record.coalition},
        {"excluded", record.excluded},
        {"coalition_true_power", record.coalition_true_power.str()},
        {"order", order},
        {"seed", seed},
    };
}

inline const char* deviation_class_name(DeviationClass cls) {
    switch (cls) {
    case DeviationClass::NoJoin: return "no-join";
    case DeviationClass::UnderDeclaration: return "under-declaration";
    case DeviationClass::Truthful: return "truthful";
    case DeviationClass::OverDeclaration: return "over-declaration";
    }
    return "?";
}

inline json to_json(const DeviationWitness& w, PowerUnits grid) {
    return json{
        {"node", w.node},
        {"original", to_json(w.original, grid)},
        {"deviation", to_json(w.deviation, grid)},
        {"class", deviation_class_name(w.cls)},
        {"utility_before", w.utility_before.str()},
        {"utility_after", w.utility_after.str()},
        {"improvement", w.improvement.str()},
    };
}

inline json to_json(const EnumerationStats& stats) {
    return json{
        {"profiles_evaluated", stats.profiles_evaluated},
        {"orders_walked", stats.orders_walked},
        {"deviations_checked", stats.deviations_checked},
    };
}

inline json to_json(const NeResult& result, PowerUnits grid) {
    json witnesses = json::array();
    for (const auto& w : result.witnesses) witnesses.push_back(to_json(w, grid));
    return json{
        {"holds", result.holds},
        {"witnesses", witnesses},
        {"enumeration_stats", to_json(result.stats)},
    };
}

inline json to_json(const SpeResult& result, PowerUnits grid) {
    return json{
        {"holds", result.holds},
        {"subgame", to_json(result.subgame, grid)},
        {"launcher_attack_utility", result.launcher_attack_utility.str()},
        {"launcher_honest_utility", result.launcher_honest_utility.str()},
        {"strict", result.launcher_strictly_prefers_attack},
    };
}

inline json to_json(const WinnerReport& report) {
    json powers = json::array();
    for (const auto& p : report.coalition_powers) powers.push_back(p.str());
    json out{
        {"no_winner", report.no_winner},
        {"uniqueness_violated", report.uniqueness_violated},
        {"coalition_powers", powers},
    };
    if (report.winner)
        out["winner"] = *report.winner;
    else
        out["winner"] = nullptr;
    return out;
}

inline json to_json(const WinProbability& wp) {
    json win = json::array();
    for (const auto& p : wp.win) win.push_back(p.str());
    return json{
        {"exact", wp.exact},
        {"win", win},
        {"no_winner", wp.no_winner.str()},
        {"assignments", wp.assignments},
    };
}

inline json to_json(const MultiContractNeResult& result) {
    auto witness_list = [](const std::vector<MultiContractWitness>& ws) {
        json arr = json::array();
        for (const auto& w : ws)
            arr.push_back(json{{"node", w.node},
                               {"original_action", w.original_action},
                               {"deviation_action", w.deviation_action},
                               {"utility_before", w.utility_before.str()},
                               {"utility_after", w.utility_after.str()}});
        return arr;
    };
    return json{
        {"holds", result.holds},
        {"assumptions_hold", result.assumptions_hold},
        {"witnesses", witness_list(result.witnesses)},
        {"lemma_violations", witness_list(result.lemma_violations)},
        {"note", result.note},
    };
}

inline json to_json(const EtaEstimate& e) {
    return json{
        {"eta_latency", e.eta_latency},
        {"eta_variance", e.eta_variance},
        {"eta", e.eta},
    };
}

inline json to_json(const ProfitEntry& e) {
    return json{
        {"node", e.node},
        {"coalition_member", e.coalition_member},
        {"attack_utility", e.attack_utility.str()},
        {"honest_utility", e.honest_utility.str()},
        {"attack_profitable", e.attack_profitable},
    };
}

inline json to_json(const ValidationReport& report) {
    json issues = json::array();
    for (const auto& issue : report.issues) issues.push_back(issue.message);
    return json{{"runnable", report.runnable()}, {"issues", issues}};
}

// CSV export of a ledger: node_id, true_power, total_reward, total_cost,
// avg_utility.
inline std::string ledger_to_csv(const RewardLedger& ledger, const PowerDistribution& powers) {
    std::string out = "node_id,true_power,total_reward,total_cost,avg_utility\n";
    const auto averages = average_utility(ledger);
    char buf[128];
    for (std::size_t i = 0; i < powers.n(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", i,
                      powers.power(static_cast<NodeId>(i)).to_double(), ledger.rewards[i],
                      ledger.costs[i], averages[i]);
        out += buf;
    }
    return out;
}

inline json ledger_to_json(const RewardLedger& ledger, const PowerDistribution& powers) {
    const auto averages = average_utility(ledger);
    json rows = json::array();
    for (std::size_t i = 0; i < powers.n(); ++i)
        rows.push_back(json{{"node_id", i},
                            {"true_power", powers.power(static_cast<NodeId>(i)).to_double()},
                            {"total_reward", ledger.rewards[i]},
                            {"total_cost", ledger.costs[i]},
                            {"avg_utility", averages[i]}});
    return json{{"blocks", ledger.blocks}, {"nodes", rows}};
}

} // namespace censim
