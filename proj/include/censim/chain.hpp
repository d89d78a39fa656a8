#pragma once

// Discrete-time block production under honest and censorship regimes.
//
// The message filter is the mechanism as specified: once the attack is
// active, coalition members send and deliver only among themselves. At the
// level of block statistics this collapses to sampling the proposer from the
// coalition with renormalized true powers, which is what produce_block does;
// the filter itself stays available so the behaviour is testable per message.

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "censim/core.hpp"
#include "censim/reward.hpp"
#include "censim/rng.hpp"

namespace censim {

struct ChainConfig {
    PowerDistribution powers;
    ProtocolParams params;
    std::int64_t horizon = 1;
    RewardFunction reward = RewardFunction::constant(Rat{1});
    std::uint64_t seed = 0;
};

struct AttackRegime {
    bool active = false;
    std::vector<NodeId> coalition;
    std::int64_t trigger_block = 0;

    bool in_coalition(NodeId node) const {
        return std::find(coalition.begin(), coalition.end(), node) != coalition.end();
    }
    bool engaged_at(std::int64_t block) const { return active && block >= trigger_block; }
};

enum class Direction { Send, Deliver };
enum class FilterDecision { Pass, Drop };

// Alg-2 filter: pass iff no active attack or the peer is a coalition member.
// Send and Deliver apply the same rule; the direction is kept for call sites
// that log traffic.
inline FilterDecision filter_message(Direction, NodeId peer, const AttackRegime& regime) {
    if (!regime.active || regime.in_coalition(peer)) return FilterDecision::Pass;
    return FilterDecision::Drop;
}

namespace detail {
inline void check_regime(const ChainConfig& config, const AttackRegime& regime) {
    if (!regime.active) return;
    if (regime.coalition.empty())
        throw std::invalid_argument("attack regime with empty coalition");
    PowerUnits units = 0;
    for (NodeId node : regime.coalition) units += config.powers.units(node);
    if (!reaches_threshold(units, config.powers.grid(), config.params.t))
        throw std::invalid_argument("attack regime coalition below threshold t");
}

inline PowerUnits coalition_units(const ChainConfig& config, const AttackRegime& regime) {
    PowerUnits units = 0;
    for (NodeId node : regime.coalition) units += config.powers.units(node);
    return units;
}
} // namespace detail

// Samples the proposer for one block and returns the block reward. Honest
// blocks draw every node with probability v_i; once the attack engages,
// excluded nodes' blocks never propagate, so the draw renormalizes over the
// coalition's true powers. Integer draws keep runs bit-reproducible.
inline std::pair<NodeId, double> produce_block(std::int64_t block_index,
                                               const AttackRegime& regime,
                                               const ChainConfig& config,
                                               std::mt19937_64& rng) {
    const bool engaged = regime.engaged_at(block_index);
    PowerUnits total = engaged ? detail::coalition_units(config, regime)
                               : config.powers.total_units();
    if (total <= 0) throw std::invalid_argument("produce_block: zero total power");

    std::uint64_t draw = bounded_u64(rng, static_cast<std::uint64_t>(total));
    NodeId proposer = 0;
    PowerUnits cumulative = 0;
    if (engaged) {
        for (NodeId node : regime.coalition) {
            cumulative += config.powers.units(node);
            if (draw < static_cast<std::uint64_t>(cumulative)) { proposer = node; break; }
        }
    } else {
        for (NodeId node = 0; node < config.powers.n(); ++node) {
            cumulative += config.powers.units(node);
            if (draw < static_cast<std::uint64_t>(cumulative)) { proposer = node; break; }
        }
    }

    std::size_t effective = engaged ? regime.coalition.size() : config.powers.n();
    return {proposer, config.reward(effective).to_double()};
}

// Runs `horizon` blocks and accumulates rewards and costs.
// `strategy_exclusion_count` is the k that enters the cost step function;
// coalition members pay cost_of_strategy(k) * v_i on every block the attack
// is engaged.
inline RewardLedger simulate_horizon(const ChainConfig& config, const AttackRegime& regime,
                                     std::size_t strategy_exclusion_count) {
    detail::check_regime(config, regime);
    if (config.horizon < 1) throw std::invalid_argument("simulate_horizon: horizon must be >= 1");

    RewardLedger ledger(config.powers.n());
    auto rng = std::mt19937_64{config.seed};
    const double per_block_cost_rate =
        cost_of_strategy(strategy_exclusion_count, config.params).to_double();

    for (std::int64_t block = 0; block < config.horizon; ++block) {
        auto [proposer, reward] = produce_block(block, regime, config, rng);
        ledger.rewards[proposer] += reward;
        if (regime.engaged_at(block) && per_block_cost_rate > 0.0) {
            for (NodeId node : regime.coalition)
                ledger.costs[node] +=
                    per_block_cost_rate * config.powers.power(node).to_double();
        }
    }
    ledger.blocks = config.horizon;
    return ledger;
}

// Closed-form expected per-node per-block utility, no sampling. Exact:
// honest nodes earn v_i * f(n); engaged coalition members earn
// (v_i / V) * f(|coalition|) - cost * v_i; excluded nodes earn 0.
// The attack, when active, is taken as engaged for the whole horizon.
inline std::vector<Rat> expected_ledger(const ChainConfig& config, const AttackRegime& regime) {
    detail::check_regime(config, regime);
    const std::size_t n = config.powers.n();
    std::vector<Rat> utilities(n, Rat{0});

    if (!regime.active) {
        const Rat honest_reward = config.reward(n);
        for (NodeId i = 0; i < n; ++i)
            utilities[i] = config.powers.power(i) * honest_reward;
        return utilities;
    }

    const PowerUnits coalition_units = detail::coalition_units(config, regime);
    const Rat coalition_power = Rat{coalition_units, config.powers.grid()};
    const Rat block_reward = config.reward(regime.coalition.size());
    const std::size_t excluded = n - regime.coalition.size();
    const Rat cost_rate = cost_of_strategy(excluded, config.params);

    for (NodeId node : regime.coalition) {
        const Rat share = config.powers.power(node) / coalition_power;
        utilities[node] = share * block_reward - cost_rate * config.powers.power(node);
    }
    return utilities;
}

} // namespace censim
