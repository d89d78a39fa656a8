#pragma once

// The two countermeasures and the detectability-threshold estimator:
//  - participation-dependent block rewards, with the unprofitability
//    condition f(n_eff) < t * f(n) checked per reachable coalition size;
//  - simultaneous attack contracts, with winner resolution, uniform-join win
//    probabilities and the coordination equilibrium check;
//  - the eta estimate combining a latency bound with the variance of the
//    active-node count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "censim/chain.hpp"
#include "censim/core.hpp"
#include "censim/reward.hpp"
#include "censim/rng.hpp"

namespace censim {

// ---------------------------------------------------------------------------
// Reward-function countermeasure

struct UnprofitabilityPartition {
    std::vector<std::size_t> satisfied_for; // f(k) <  t * f(n)
    std::vector<std::size_t> violated_for;  // f(k) >= t * f(n)
};

// Partitions coalition sizes 1..n-1 by the unprofitability condition. Since
// t lower-bounds any successful coalition's power V, f(k) < t*f(n) implies
// (v_i/V) f(k) < v_i f(n) for every member.
inline UnprofitabilityPartition check_unprofitability_condition(const RewardFunction& f,
                                                                const ProtocolParams& params,
                                                                std::size_t n) {
    if (n < 2) throw std::invalid_argument("need n >= 2");
    if (!f.valid_on(n)) throw std::invalid_argument("reward function undefined on [1, n]");
    UnprofitabilityPartition partition;
    const Rat bound = params.t * f(n);
    for (std::size_t k = 1; k < n; ++k)
        (f(k) < bound ? partition.satisfied_for : partition.violated_for).push_back(k);
    return partition;
}

struct ProfitEntry {
    NodeId node;
    bool coalition_member;
    Rat attack_utility;
    Rat honest_utility;
    bool attack_profitable; // strictly better than honest
};

// Per-node comparison of the per-block utility with the attack in force
// against the honest chain, both under the given reward function.
inline std::vector<ProfitEntry> attack_profitability_under_reward(
    const RewardFunction& f, const PowerDistribution& powers, const ProtocolParams& params,
    const std::vector<NodeId>& coalition) {
    ChainConfig config{powers, params, 1, f, 0};
    AttackRegime regime{true, coalition, 0};
    const std::vector<Rat> attack = expected_ledger(config, regime);
    const std::vector<Rat> honest = expected_ledger(config, AttackRegime{});

    std::vector<ProfitEntry> entries;
    entries.reserve(powers.n());
    for (NodeId i = 0; i < powers.n(); ++i) {
        entries.push_back({i, regime.in_coalition(i), attack[i], honest[i],
                           attack[i] > honest[i]});
    }
    return entries;
}

// ---------------------------------------------------------------------------
// Simultaneous contracts

enum class JoinModel {
    AllJoinCoalition,      // every free node joins one designated coalition
    UniformRandom,         // free nodes pick a coalition uniformly at random
    ExplicitProfile,       // caller supplies one action per free node
    JoinAllCoalitionsDemo, // free nodes join every coalition; first contract wins
};

struct MultiContractSpec {
    std::size_t k = 2;
    std::vector<NodeId> launchers; // one per contract, distinct
    PowerDistribution powers;
    ProtocolParams params;
    JoinModel join_model = JoinModel::AllJoinCoalition;
    std::size_t join_coalition = 0;  // AllJoinCoalition target, 0-based
    std::vector<int> actions;        // ExplicitProfile: 0 = no-op, j = coalition j (1-based)
    std::uint64_t seed = 0;
    std::uint64_t trials = 100000;
    // Relaxation: launchers may also choose a coalition (they stop being
    // bound to their own). Off by default.
    bool allow_launcher_moves = false;

    bool is_launcher(NodeId node) const {
        return std::find(launchers.begin(), launchers.end(), node) != launchers.end();
    }

    // Nodes that choose an action: non-launchers, plus every launcher when
    // the relaxation is enabled.
    std::vector<NodeId> movers() const {
        std::vector<NodeId> out;
        for (NodeId i = 0; i < powers.n(); ++i)
            if (allow_launcher_moves || !is_launcher(i)) out.push_back(i);
        return out;
    }

    void validate() const {
        if (k < 1 || k >= powers.n())
            throw std::invalid_argument("multi-contract: need 1 <= k < n");
        if (launchers.size() != k)
            throw std::invalid_argument("multi-contract: need one launcher per contract");
        std::vector<NodeId> sorted = launchers;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("multi-contract: launchers must be distinct");
        for (NodeId l : launchers)
            if (static_cast<std::size_t>(l) >= powers.n())
                throw std::invalid_argument("multi-contract: launcher id out of range");
        if (join_model == JoinModel::AllJoinCoalition && join_coalition >= k)
            throw std::invalid_argument("multi-contract: join target out of range");
    }
};

struct WinnerReport {
    std::optional<std::size_t> winner; // contract index
    std::vector<Rat> coalition_powers; // final true power per contract
    bool no_winner = false;
    bool uniqueness_violated = false;  // two coalitions at >= t (possible only at t = 1/2)
};

namespace detail {

// Resolves a full assignment: actions[m] for each mover (0 = no-op,
// 1..k = coalition). Launchers not in the mover set stay in their own
// coalition.
inline WinnerReport resolve_assignment(const MultiContractSpec& spec,
                                       const std::vector<NodeId>& movers,
                                       const std::vector<int>& actions) {
    std::vector<PowerUnits> units(spec.k, 0);
    if (!spec.allow_launcher_moves)
        for (std::size_t j = 0; j < spec.k; ++j) units[j] = spec.powers.units(spec.launchers[j]);
    for (std::size_t m = 0; m < movers.size(); ++m) {
        const int action = actions[m];
        if (action < 0 || static_cast<std::size_t>(action) > spec.k)
            throw std::invalid_argument("multi-contract: action out of range");
        if (action > 0) units[action - 1] += spec.powers.units(movers[m]);
    }

    WinnerReport report;
    report.coalition_powers.reserve(spec.k);
    std::size_t winners = 0;
    for (std::size_t j = 0; j < spec.k; ++j) {
        report.coalition_powers.push_back(Rat{units[j], spec.powers.grid()});
        if (reaches_threshold(units[j], spec.powers.grid(), spec.params.t)) {
            winners += 1;
            report.winner = j;
        }
    }
    if (winners == 0) {
        report.winner.reset();
        report.no_winner = true;
    } else if (winners > 1) {
        // t > 1/2 makes this impossible; report it rather than pick one.
        report.winner.reset();
        report.uniqueness_violated = true;
    }
    return report;
}

inline std::vector<int> assignment_for(const MultiContractSpec& spec,
                                       const std::vector<NodeId>& movers) {
    switch (spec.join_model) {
    case JoinModel::AllJoinCoalition:
        return std::vector<int>(movers.size(), static_cast<int>(spec.join_coalition) + 1);
    case JoinModel::ExplicitProfile:
        if (spec.actions.size() != movers.size())
            throw std::invalid_argument("multi-contract: need one action per free node");
        return spec.actions;
    default:
        throw std::invalid_argument("multi-contract: model has no fixed assignment");
    }
}

} // namespace detail

inline WinnerReport resolve_multi_contract(const MultiContractSpec& spec) {
    spec.validate();
    const auto movers = spec.movers();

    if (spec.join_model == JoinModel::JoinAllCoalitionsDemo) {
        // Joining costs nothing, so free nodes join everything and the first
        // posted contract fills first: total order on the chain breaks the tie.
        WinnerReport report;
        PowerUnits shared = 0;
        for (NodeId m : movers)
            if (!spec.is_launcher(m)) shared += spec.powers.units(m);
        for (std::size_t j = 0; j < spec.k; ++j)
            report.coalition_powers.push_back(
                Rat{spec.powers.units(spec.launchers[j]) + shared, spec.powers.grid()});
        if (reaches_threshold(spec.powers.units(spec.launchers[0]) + shared,
                              spec.powers.grid(), spec.params.t))
            report.winner = 0;
        else
            report.no_winner = true;
        return report;
    }

    return detail::resolve_assignment(spec, movers, detail::assignment_for(spec, movers));
}

struct WinProbability {
    bool exact = true;
    std::vector<Rat> win; // per contract
    Rat no_winner;
    std::uint64_t assignments = 0; // enumerated or sampled
};

// Uncoordinated joining: every mover picks a coalition uniformly at random
// (no abstention). Exact enumeration up to 1e6 assignments, Monte Carlo
// beyond that.
inline WinProbability win_probability(const MultiContractSpec& spec) {
    spec.validate();
    const auto movers = spec.movers();
    const std::size_t f = movers.size();

    double total_d = std::pow(static_cast<double>(spec.k), static_cast<double>(f));
    WinProbability result;
    result.win.assign(spec.k, Rat{0});

    if (total_d <= 1e6) {
        std::uint64_t total = 1;
        for (std::size_t i = 0; i < f; ++i) total *= spec.k;
        std::vector<std::uint64_t> wins(spec.k, 0);
        std::uint64_t none = 0;
        std::vector<int> actions(f, 1);
        for (std::uint64_t code = 0; code < total; ++code) {
            std::uint64_t c = code;
            for (std::size_t i = 0; i < f; ++i) {
                actions[i] = static_cast<int>(c % spec.k) + 1;
                c /= spec.k;
            }
            auto report = detail::resolve_assignment(spec, movers, actions);
            if (report.winner)
                wins[*report.winner] += 1;
            else
                none += 1;
        }
        const auto denom = static_cast<std::int64_t>(total);
        for (std::size_t j = 0; j < spec.k; ++j)
            result.win[j] = Rat{static_cast<std::int64_t>(wins[j]), denom};
        result.no_winner = Rat{static_cast<std::int64_t>(none), denom};
        result.assignments = total;
        return result;
    }

    auto rng = ShuffleSource{spec.seed}.engine();
    std::vector<std::uint64_t> wins(spec.k, 0);
    std::uint64_t none = 0;
    std::vector<int> actions(f);
    for (std::uint64_t trial = 0; trial < spec.trials; ++trial) {
        for (std::size_t i = 0; i < f; ++i)
            actions[i] = static_cast<int>(bounded_u64(rng, spec.k)) + 1;
        auto report = detail::resolve_assignment(spec, movers, actions);
        if (report.winner)
            wins[*report.winner] += 1;
        else
            none += 1;
    }
    result.exact = false;
    const auto denom = static_cast<std::int64_t>(spec.trials);
    for (std::size_t j = 0; j < spec.k; ++j)
        result.win[j] = Rat{static_cast<std::int64_t>(wins[j]), denom};
    result.no_winner = Rat{static_cast<std::int64_t>(none), denom};
    result.assignments = spec.trials;
    return result;
}

// ---------------------------------------------------------------------------
// Coordination equilibrium in the multi-contract game

struct MultiContractWitness {
    NodeId node;
    int original_action;  // 1-based coalition, 0 = no-op
    int deviation_action;
    Rat utility_before;
    Rat utility_after;
};

struct MultiContractNeResult {
    // The coordination argument needs the designated coalition minus any one
    // mover to still reach t. Scenarios that fail this are reported as
    // outside the assumptions instead of being claimed either way.
    bool assumptions_hold = false;
    bool holds = false;
    std::vector<MultiContractWitness> witnesses;
    std::vector<MultiContractWitness> lemma_violations; // mixed no-op mass not dominated
    std::string note;
};

namespace detail {

// Payoffs in the multi-contract game: the winning coalition splits f = 1 by
// true power, everyone else is censored to 0; with no winner the honest
// chain pays v_i.
inline std::vector<Rat> multi_contract_payoffs(const MultiContractSpec& spec,
                                               const std::vector<NodeId>& movers,
                                               const std::vector<int>& actions) {
    auto report = resolve_assignment(spec, movers, actions);
    const std::size_t n = spec.powers.n();
    std::vector<Rat> payoffs(n, Rat{0});
    if (!report.winner) {
        for (NodeId i = 0; i < n; ++i) payoffs[i] = spec.powers.power(i);
        return payoffs;
    }
    const std::size_t w = *report.winner;
    const Rat winner_power = report.coalition_powers[w];
    auto pay_member = [&](NodeId node) {
        payoffs[node] = spec.powers.power(node) / winner_power;
    };
    if (!spec.allow_launcher_moves) pay_member(spec.launchers[w]);
    for (std::size_t m = 0; m < movers.size(); ++m)
        if (actions[m] == static_cast<int>(w) + 1) pay_member(movers[m]);
    return payoffs;
}

} // namespace detail

// Checks the pure coordination profile "every mover joins coalition j":
// no mover gains by unilaterally switching coalition or abstaining
// (exhaustive), and no-op probability mass in a mixed strategy is weakly
// dominated by shifting it to j (sampled mixed strategies, exact weights).
inline MultiContractNeResult verify_multi_contract_ne(const MultiContractSpec& spec,
                                                      std::size_t mixed_samples = 64) {
    spec.validate();
    if (spec.join_model != JoinModel::AllJoinCoalition)
        throw std::invalid_argument("verify_multi_contract_ne needs AllJoinCoalition");

    MultiContractNeResult result;
    const auto movers = spec.movers();
    const int j_action = static_cast<int>(spec.join_coalition) + 1;
    const std::vector<int> base_actions(movers.size(), j_action);

    // Assumption gate: coalition j minus any single mover still reaches t.
    PowerUnits coalition_units = spec.allow_launcher_moves
                                     ? 0
                                     : spec.powers.units(spec.launchers[spec.join_coalition]);
    for (NodeId m : movers) coalition_units += spec.powers.units(m);
    result.assumptions_hold = true;
    for (NodeId m : movers) {
        if (!reaches_threshold(coalition_units - spec.powers.units(m), spec.powers.grid(),
                               spec.params.t)) {
            result.assumptions_hold = false;
            result.note = "coalition minus node " + std::to_string(m) +
                          " falls below t; theorem preconditions not met";
            break;
        }
    }

    const std::vector<Rat> base = detail::multi_contract_payoffs(spec, movers, base_actions);

    // Exhaustive unilateral deviations.
    for (std::size_t m = 0; m < movers.size(); ++m) {
        for (int action = 0; action <= static_cast<int>(spec.k); ++action) {
            if (action == j_action) continue;
            std::vector<int> deviated = base_actions;
            deviated[m] = action;
            const auto payoffs = detail::multi_contract_payoffs(spec, movers, deviated);
            if (payoffs[movers[m]] > base[movers[m]])
                result.witnesses.push_back({movers[m], j_action, action, base[movers[m]],
                                            payoffs[movers[m]]});
        }
    }

    // Lemma check: moving no-op mass to j never hurts. Pure payoffs are
    // exact, weights are small random rationals, so the comparison is exact.
    auto rng = ShuffleSource{spec.seed ^ 0x9e3779b97f4a7c15ull}.engine();
    for (std::size_t m = 0; m < movers.size(); ++m) {
        std::vector<Rat> pure(spec.k + 1);
        for (int action = 0; action <= static_cast<int>(spec.k); ++action) {
            std::vector<int> deviated = base_actions;
            deviated[m] = action;
            pure[action] = detail::multi_contract_payoffs(spec, movers, deviated)[movers[m]];
        }
        for (std::size_t s = 0; s < mixed_samples; ++s) {
            std::vector<std::int64_t> weights(spec.k + 1);
            std::int64_t total = 0;
            for (auto& w : weights) {
                w = static_cast<std::int64_t>(bounded_u64(rng, 100));
                total += w;
            }
            if (weights[0] == 0) { // the lemma is about profiles with no-op mass
                weights[0] = 1;
                total += 1;
            }
            Rat mixed{0}, shifted{0};
            for (int action = 0; action <= static_cast<int>(spec.k); ++action) {
                const Rat w{weights[action], total};
                mixed += w * pure[action];
                if (action == 0)
                    shifted += w * pure[j_action]; // no-op mass moved to j
                else
                    shifted += w * pure[action];
            }
            if (shifted < mixed)
                result.lemma_violations.push_back(
                    {movers[m], 0, j_action, mixed, shifted});
        }
    }

    result.holds = result.assumptions_hold && result.witnesses.empty() &&
                   result.lemma_violations.empty();
    return result;
}

// ---------------------------------------------------------------------------
// Detectability-threshold estimation

struct EtaEstimate {
    int eta_latency = 0;  // nodes silent within the latency window look normal
    int eta_variance = 0; // ceil(z * sample stddev of the active-node count)
    int eta = 1;
};

inline EtaEstimate estimate_eta(int latency_blocks, const std::vector<double>& active_history,
                                double z) {
    if (active_history.size() < 2)
        throw std::invalid_argument("estimate_eta: need at least 2 history points");
    if (latency_blocks < 0 || z < 0.0)
        throw std::invalid_argument("estimate_eta: negative parameter");

    double mean = 0.0;
    for (double v : active_history) mean += v;
    mean /= static_cast<double>(active_history.size());
    double ss = 0.0;
    for (double v : active_history) ss += (v - mean) * (v - mean);
    const double stddev = std::sqrt(ss / static_cast<double>(active_history.size() - 1));

    const double variance_bound = std::ceil(z * stddev);
    if (!(variance_bound < 1e9))
        throw std::invalid_argument("estimate_eta: variance bound out of range");

    EtaEstimate estimate;
    estimate.eta_latency = latency_blocks;
    estimate.eta_variance = static_cast<int>(variance_bound);
    estimate.eta = std::max(1, std::max(estimate.eta_latency, estimate.eta_variance));
    return estimate;
}

} // namespace censim
