#pragma once

// The induced two-stage extensive-form game: the launcher decides whether to
// post the contract, the remaining players simultaneously pick an action from
// {no-op, 0, eps, 2*eps, ..., 1}, and a chance vertex orders the responders.
//
// Expected utilities are computed exactly (rationals, uniform enumeration of
// response orders) or by seeded Monte Carlo. The equilibrium verifiers use
// the exact path so the comparisons carry no tolerance at all.

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "censim/chain.hpp"
#include "censim/core.hpp"
#include "censim/cta.hpp"
#include "censim/reward.hpp"
#include "censim/rng.hpp"

namespace censim {

struct Action {
    bool join = false;
    PowerUnits declared = 0;

    static Action noop() { return {}; }
    static Action declare(PowerUnits units) { return {true, units}; }

    friend bool operator==(const Action&, const Action&) = default;
};

struct StrategyProfile {
    bool launcher_attacks = true;
    PowerUnits launcher_declared = 0;
    std::vector<Action> responder_actions; // indexed by NodeId; launcher slot unused
};

enum class OrderDistribution { UniformExact, UniformSampled };

// DeclaredPower pays coalition members in proportion to what they declared
// instead of what they hold. It deliberately breaks the reward-independence
// property and exists as a negative control for the equilibrium verifiers.
enum class RewardBasis { TruePower, DeclaredPower };

struct GameSpec {
    PowerDistribution powers;
    ProtocolParams params;
    NodeId launcher = 0;
    OrderDistribution order_distribution = OrderDistribution::UniformExact;
    std::uint64_t trials = 100000; // UniformSampled only
    std::uint64_t seed = 1;
    RewardFunction reward = RewardFunction::constant(Rat{1});
    RewardBasis reward_basis = RewardBasis::TruePower;
    std::size_t exact_responder_cap = 8; // factorial blowup guard
};

inline StrategyProfile truthful_profile(const GameSpec& spec) {
    StrategyProfile profile;
    profile.launcher_attacks = true;
    profile.launcher_declared = spec.powers.units(spec.launcher);
    profile.responder_actions.resize(spec.powers.n());
    for (NodeId i = 0; i < spec.powers.n(); ++i) {
        if (i == spec.launcher) continue;
        profile.responder_actions[i] = Action::declare(spec.powers.units(i));
    }
    return profile;
}

struct UtilityVector {
    bool exact = true;
    std::vector<Rat> values;     // exact mode
    std::vector<double> approx;  // both modes
    std::vector<double> stderrs; // sampled mode, zero otherwise

    double value_of(NodeId i) const { return approx.at(i); }
};

// One resolved chance realization under a fixed profile.
struct OutcomeTrace {
    OutcomeRecord record;
    std::vector<Rat> utilities;
};

namespace detail {

inline std::vector<NodeId> joiners(const GameSpec& spec, const StrategyProfile& profile) {
    std::vector<NodeId> out;
    for (NodeId i = 0; i < spec.powers.n(); ++i)
        if (i != spec.launcher && profile.responder_actions[i].join) out.push_back(i);
    return out;
}

inline std::vector<std::optional<PowerUnits>> responses_of(const GameSpec& spec,
                                                           const StrategyProfile& profile) {
    std::vector<std::optional<PowerUnits>> responses(spec.powers.n());
    for (NodeId i = 0; i < spec.powers.n(); ++i) {
        if (i == spec.launcher) continue;
        const Action& a = profile.responder_actions[i];
        if (a.join) responses[i] = a.declared;
    }
    return responses;
}

inline void check_profile(const GameSpec& spec, const StrategyProfile& profile) {
    if (profile.responder_actions.size() != spec.powers.n())
        throw std::invalid_argument("profile size does not match node count");
    if (static_cast<std::size_t>(spec.launcher) >= spec.powers.n())
        throw std::invalid_argument("launcher id out of range");
    auto on_grid = [&](PowerUnits u) { return u >= 0 && u <= spec.powers.grid(); };
    if (profile.launcher_attacks && !on_grid(profile.launcher_declared))
        throw std::invalid_argument("launcher declaration off the epsilon grid");
    for (NodeId i = 0; i < spec.powers.n(); ++i) {
        if (i == spec.launcher) continue;
        const Action& a = profile.responder_actions[i];
        if (a.join && !on_grid(a.declared))
            throw std::invalid_argument("responder declaration off the epsilon grid");
    }
}

inline ChainConfig single_block_config(const GameSpec& spec) {
    return ChainConfig{spec.powers, spec.params, 1, spec.reward, 0};
}

inline std::vector<Rat> honest_utilities(const GameSpec& spec) {
    return expected_ledger(single_block_config(spec), AttackRegime{});
}

// Payoff vector for one resolved play. Failed attacks leave the honest chain
// in place, so everybody keeps the honest expectation.
inline std::vector<Rat> outcome_utilities(const GameSpec& spec, const StrategyProfile& profile,
                                          const ChainConfig& config,
                                          const OutcomeRecord& record) {
    if (!record.success) return expected_ledger(config, AttackRegime{});

    if (spec.reward_basis == RewardBasis::TruePower) {
        AttackRegime regime{true, record.coalition, 0};
        return expected_ledger(config, regime);
    }

    // Doctored declared-power payout (negative control).
    std::vector<Rat> utilities(spec.powers.n(), Rat{0});
    PowerUnits declared_sum = 0;
    for (NodeId node : record.coalition)
        declared_sum += node == spec.launcher ? profile.launcher_declared
                                              : profile.responder_actions[node].declared;
    const Rat block_reward = spec.reward(record.coalition.size());
    const Rat cost_rate = cost_of_strategy(record.excluded.size(), spec.params);
    for (NodeId node : record.coalition) {
        PowerUnits declared = node == spec.launcher ? profile.launcher_declared
                                                    : profile.responder_actions[node].declared;
        Rat share = declared_sum > 0 ? Rat{declared, declared_sum} : Rat{0};
        utilities[node] = share * block_reward - cost_rate * spec.powers.power(node);
    }
    return utilities;
}

} // namespace detail

// Exhaustive chance resolution: one trace per permutation of the joining
// responders. All traces are equiprobable.
inline std::vector<OutcomeTrace> enumerate_outcomes(const GameSpec& spec,
                                                    const StrategyProfile& profile) {
    detail::check_profile(spec, profile);
    if (!profile.launcher_attacks)
        throw std::logic_error("enumerate_outcomes: no chance stage without an attack");
    if (spec.powers.n() - 1 > spec.exact_responder_cap)
        throw std::invalid_argument("exact enumeration capped at " +
                                    std::to_string(spec.exact_responder_cap) + " responders");

    const auto responses = detail::responses_of(spec, profile);
    const ChainConfig config = detail::single_block_config(spec);
    std::vector<OutcomeTrace> traces;
    for (const ResponseOrder& order : all_orders(detail::joiners(spec, profile))) {
        OutcomeTrace trace;
        trace.record = run_contract(spec.powers, spec.launcher, profile.launcher_declared,
                                    responses, order, spec.params);
        trace.utilities = detail::outcome_utilities(spec, profile, config, trace.record);
        traces.push_back(std::move(trace));
    }
    return traces;
}

inline UtilityVector expected_utilities(const GameSpec& spec, const StrategyProfile& profile) {
    detail::check_profile(spec, profile);
    const std::size_t n = spec.powers.n();

    UtilityVector result;
    if (!profile.launcher_attacks) {
        result.values = detail::honest_utilities(spec);
        result.approx.resize(n);
        result.stderrs.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) result.approx[i] = result.values[i].to_double();
        return result;
    }

    if (spec.order_distribution == OrderDistribution::UniformExact) {
        auto traces = enumerate_outcomes(spec, profile);
        std::vector<Rat> sum(n, Rat{0});
        for (const auto& trace : traces)
            for (std::size_t i = 0; i < n; ++i) sum[i] += trace.utilities[i];
        const Rat weight{1, static_cast<std::int64_t>(traces.size())};
        result.values.resize(n);
        result.approx.resize(n);
        result.stderrs.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            result.values[i] = sum[i] * weight;
            result.approx[i] = result.values[i].to_double();
        }
        return result;
    }

    // Monte Carlo over sampled orders.
    if (spec.trials < 2) throw std::invalid_argument("sampled mode needs >= 2 trials");
    const auto responses = detail::responses_of(spec, profile);
    const auto joiners = detail::joiners(spec, profile);
    const ChainConfig config = detail::single_block_config(spec);
    auto rng = ShuffleSource{spec.seed}.engine();

    std::vector<double> sum(n, 0.0), sumsq(n, 0.0);
    std::vector<NodeId> order_nodes(joiners);
    for (std::uint64_t trial = 0; trial < spec.trials; ++trial) {
        order_nodes = joiners;
        fisher_yates(order_nodes, rng);
        auto record = run_contract(spec.powers, spec.launcher, profile.launcher_declared,
                                   responses, ResponseOrder{order_nodes}, spec.params);
        auto utilities = detail::outcome_utilities(spec, profile, config, record);
        for (std::size_t i = 0; i < n; ++i) {
            double u = utilities[i].to_double();
            sum[i] += u;
            sumsq[i] += u * u;
        }
    }

    result.exact = false;
    result.approx.resize(n);
    result.stderrs.resize(n);
    const double trials = static_cast<double>(spec.trials);
    for (std::size_t i = 0; i < n; ++i) {
        const double mean = sum[i] / trials;
        double var = (sumsq[i] - trials * mean * mean) / (trials - 1.0);
        if (var < 0.0) var = 0.0; // rounding guard near zero variance
        result.approx[i] = mean;
        result.stderrs[i] = std::sqrt(var / trials);
    }
    return result;
}

// p1..p5 per node over the exact order enumeration.
inline std::vector<ProbabilityProfile> probability_profile(const GameSpec& spec,
                                                           const StrategyProfile& profile) {
    if (spec.order_distribution != OrderDistribution::UniformExact)
        throw std::invalid_argument("probability_profile requires exact enumeration");
    detail::check_profile(spec, profile);

    const std::size_t n = spec.powers.n();
    std::vector<ProbabilityProfile> out(n);
    if (!profile.launcher_attacks) return out; // no attack, no events

    auto traces = enumerate_outcomes(spec, profile);
    const Rat weight{1, static_cast<std::int64_t>(traces.size())};
    for (const auto& trace : traces) {
        for (NodeId i = 0; i < n; ++i) {
            const bool joined = i == spec.launcher || profile.responder_actions[i].join;
            const bool in_coalition = std::find(trace.record.coalition.begin(),
                                                trace.record.coalition.end(),
                                                i) != trace.record.coalition.end();
            if (!trace.record.success) {
                (joined ? out[i].p1 : out[i].p2) += weight;
            } else if (!joined) {
                out[i].p4 += weight;
            } else {
                (in_coalition ? out[i].p3 : out[i].p5) += weight;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Deviation enumeration and equilibrium verification

enum class DeviationClass { NoJoin, UnderDeclaration, Truthful, OverDeclaration };

struct DeviationAction {
    Action action;
    DeviationClass cls;
};

// The full pure action set of a responder, tagged with the deviation class
// relative to its true power: no-op, every under-declaration, the truthful
// declaration, every over-declaration.
inline std::vector<DeviationAction> enumerate_deviations(NodeId node, const GameSpec& spec) {
    if (node == spec.launcher)
        throw std::invalid_argument("enumerate_deviations: launcher is not a responder");
    const PowerUnits truthful = spec.powers.units(node);
    std::vector<DeviationAction> out;
    out.push_back({Action::noop(), DeviationClass::NoJoin});
    for (PowerUnits u = 0; u <= spec.powers.grid(); ++u) {
        DeviationClass cls = u < truthful   ? DeviationClass::UnderDeclaration
                             : u == truthful ? DeviationClass::Truthful
                                             : DeviationClass::OverDeclaration;
        out.push_back({Action::declare(u), cls});
    }
    return out;
}

struct DeviationWitness {
    NodeId node;
    Action original;
    Action deviation;
    DeviationClass cls;
    Rat utility_before;
    Rat utility_after;
    Rat improvement; // after - before, positive for a genuine witness
};

struct EnumerationStats {
    std::uint64_t profiles_evaluated = 0;
    std::uint64_t orders_walked = 0;
    std::uint64_t deviations_checked = 0;
};

struct NeResult {
    bool holds = false;
    std::vector<DeviationWitness> witnesses;
    EnumerationStats stats;
};

namespace detail {
inline std::uint64_t factorial(std::size_t k) {
    std::uint64_t f = 1;
    for (std::size_t i = 2; i <= k; ++i) f *= i;
    return f;
}
} // namespace detail

// Theorem-1 check: with every responder truthful, no responder has a pure
// deviation that strictly improves its exact expected utility. Mixed
// deviations are convex combinations of pure ones, so checking the pure set
// suffices.
inline NeResult verify_ne_subgame(const GameSpec& spec) {
    if (spec.order_distribution != OrderDistribution::UniformExact)
        throw std::invalid_argument("verify_ne_subgame requires exact enumeration");
    auto report = validate_scenario(spec.powers, spec.params);
    if (!report.runnable())
        throw std::invalid_argument("verify_ne_subgame: scenario not runnable: " +
                                    report.issues.front().message);

    NeResult result;
    const StrategyProfile base = truthful_profile(spec);
    const UtilityVector base_utilities = expected_utilities(spec, base);
    result.stats.profiles_evaluated = 1;
    result.stats.orders_walked = detail::factorial(spec.powers.n() - 1);

    for (NodeId node = 0; node < spec.powers.n(); ++node) {
        if (node == spec.launcher) continue;
        for (const DeviationAction& dev : enumerate_deviations(node, spec)) {
            if (dev.cls == DeviationClass::Truthful) continue;
            StrategyProfile deviated = base;
            deviated.responder_actions[node] = dev.action;
            const UtilityVector u = expected_utilities(spec, deviated);
            result.stats.profiles_evaluated += 1;
            result.stats.deviations_checked += 1;
            result.stats.orders_walked +=
                detail::factorial(detail::joiners(spec, deviated).size());
            if (u.values[node] > base_utilities.values[node]) {
                result.witnesses.push_back({node, base.responder_actions[node], dev.action,
                                            dev.cls, base_utilities.values[node],
                                            u.values[node],
                                            u.values[node] - base_utilities.values[node]});
            }
        }
    }
    result.holds = result.witnesses.empty();
    return result;
}

struct SpeResult {
    bool holds = false;
    bool launcher_strictly_prefers_attack = false;
    Rat launcher_attack_utility;
    Rat launcher_honest_utility;
    NeResult subgame;
};

// Theorem-2 check over the two subgames: the responders' subgame must be a
// Nash equilibrium and the launcher must not prefer staying honest.
inline SpeResult verify_spe(const GameSpec& spec) {
    SpeResult result;
    result.subgame = verify_ne_subgame(spec);

    const UtilityVector attack = expected_utilities(spec, truthful_profile(spec));
    result.launcher_attack_utility = attack.values[spec.launcher];
    result.launcher_honest_utility =
        detail::honest_utilities(spec)[spec.launcher];
    result.launcher_strictly_prefers_attack =
        result.launcher_attack_utility > result.launcher_honest_utility;
    result.holds = result.subgame.holds &&
                   result.launcher_attack_utility >= result.launcher_honest_utility;
    return result;
}

// ---------------------------------------------------------------------------
// Game tree rendering (DOT)

namespace detail {
inline std::string payoff_label(const std::vector<Rat>& utilities) {
    std::string label = "(";
    for (std::size_t i = 0; i < utilities.size(); ++i) {
        if (i) label += ", ";
        label += utilities[i].str();
    }
    return label + ")";
}

inline std::string action_label(const Action& a, PowerUnits grid) {
    return a.join ? Rat{a.declared, grid}.str() : "noop";
}
} // namespace detail

// Emits the two-stage tree in DOT: launcher root, one simultaneous-move layer
// per responder (grouped into information-set clusters), a chance vertex per
// joint action profile and one leaf per response order.
inline std::string render_game_tree(const GameSpec& spec) {
    const std::size_t n = spec.powers.n();
    if (n > 4)
        throw std::invalid_argument("render_game_tree is limited to n <= 4 nodes");

    std::vector<NodeId> responders;
    for (NodeId i = 0; i < n; ++i)
        if (i != spec.launcher) responders.push_back(i);

    std::ostringstream dot;
    dot << "digraph game {\n  rankdir=TB;\n";
    dot << "  root [label=\"x" << spec.launcher + 1 << "\"];\n";
    dot << "  leaf_pass [shape=box,label=\""
        << detail::payoff_label(detail::honest_utilities(spec)) << "\"];\n";
    dot << "  root -> leaf_pass [label=\"no attack\"];\n";

    // Enumerate joint responder profiles depth-first; vertices of the same
    // responder share one information-set cluster.
    std::vector<std::vector<std::string>> layer_nodes(responders.size());
    std::vector<Action> actions_of(n);
    std::size_t chance_id = 0, leaf_id = 0;
    StrategyProfile profile = truthful_profile(spec);

    auto descend = [&](auto&& self, std::size_t depth, const std::string& parent,
                       const std::string& parent_edge) -> void {
        if (depth == responders.size()) {
            for (NodeId i : responders) profile.responder_actions[i] = actions_of[i];
            auto traces = enumerate_outcomes(spec, profile);
            std::string cnode = "c" + std::to_string(chance_id++);
            dot << "  " << cnode << " [shape=diamond,label=\"C\"];\n";
            dot << "  " << parent << " -> " << cnode << " [label=\"" << parent_edge
                << "\"];\n";
            const std::string prob = "1/" + std::to_string(traces.size());
            for (const auto& trace : traces) {
                std::string leaf = "leaf" + std::to_string(leaf_id++);
                std::string order_label;
                for (NodeId node : trace.record.order_used.nodes)
                    order_label += " x" + std::to_string(node + 1);
                if (order_label.empty()) order_label = " -";
                dot << "  " << leaf << " [shape=box,label=\""
                    << detail::payoff_label(trace.utilities) << "\"];\n";
                dot << "  " << cnode << " -> " << leaf << " [label=\"order" << order_label
                    << " p=" << prob << "\"];\n";
            }
            return;
        }
        const NodeId player = responders[depth];
        std::string vertex = "r" + std::to_string(depth) + "_" +
                             std::to_string(layer_nodes[depth].size());
        layer_nodes[depth].push_back(vertex);
        dot << "  " << vertex << " [label=\"x" << player + 1 << "\"];\n";
        dot << "  " << parent << " -> " << vertex << " [label=\"" << parent_edge << "\"];\n";
        for (const DeviationAction& dev : enumerate_deviations(player, spec)) {
            actions_of[player] = dev.action;
            self(self, depth + 1, vertex,
                 detail::action_label(dev.action, spec.powers.grid()));
        }
    };
    descend(descend, 0, "root",
            "attack " + Rat{spec.powers.units(spec.launcher), spec.powers.grid()}.str());

    for (std::size_t depth = 0; depth < responders.size(); ++depth) {
        if (layer_nodes[depth].size() < 2) continue;
        dot << "  subgraph cluster_x" << responders[depth] + 1
            << " { label=\"information set x" << responders[depth] + 1
            << "\"; style=dashed;";
        for (const auto& v : layer_nodes[depth]) dot << " " << v << ";";
        dot << " }\n";
    }
    dot << "}\n";
    return dot.str();
}

} // namespace censim
