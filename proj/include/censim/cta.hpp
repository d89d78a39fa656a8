#pragma once

// Call-to-Attack contract: a registry that accumulates (node, declared power)
// pairs until the declared sum reaches the threshold t or the clock runs out.
//
// Two termination policies are supported. PowerOnly closes the registry the
// moment declared power reaches t; this is the prefix structure the
// equilibrium analysis relies on and is the default. PowerAndVisibility keeps
// admitting members until, additionally, fewer than eta nodes remain
// excluded.
//
// Admission works on declared powers (all the contract can see). Functional
// success of the resulting attack additionally requires the coalition's true
// power to reach t; a coalition admitted on inflated declarations fails.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "censim/core.hpp"
#include "censim/rng.hpp"

namespace censim {

struct DeclaredResponse {
    NodeId node;
    PowerUnits declared; // on the epsilon grid, may differ from true power
};

struct ResponseOrder {
    std::vector<NodeId> nodes; // permutation of the responding nodes
};

enum class CtaStatus { Open, Succeeded, Aborted };

struct CtaState {
    NodeId launcher = 0;
    PowerUnits launcher_declared = 0;
    PowerUnits declared_total = 0;    // V, in grid units
    std::vector<NodeId> coalition;    // N_a in admission order, launcher first
    std::int64_t clock = 0;
    CtaStatus status = CtaStatus::Open;
    std::size_t node_count = 0;       // n, needed by the visibility policy

    bool contains(NodeId node) const {
        return std::find(coalition.begin(), coalition.end(), node) != coalition.end();
    }
    std::size_t excluded_count() const { return node_count - coalition.size(); }
};

namespace detail {
inline bool closure_reached(const CtaState& state, const ProtocolParams& params) {
    if (!reaches_threshold(state.declared_total, params.grid, params.t)) return false;
    if (params.policy == TerminationPolicy::PowerAndVisibility)
        return state.excluded_count() < static_cast<std::size_t>(params.eta);
    return true;
}
} // namespace detail

inline CtaState launch(NodeId launcher, PowerUnits declared, std::size_t node_count,
                       const ProtocolParams& params) {
    if (declared < 0 || declared > params.grid)
        throw std::invalid_argument("launch: declared power off the epsilon grid");
    if (static_cast<std::size_t>(launcher) >= node_count)
        throw std::invalid_argument("launch: launcher id out of range");
    CtaState state;
    state.launcher = launcher;
    state.launcher_declared = declared;
    state.declared_total = declared;
    state.coalition = {launcher};
    state.node_count = node_count;
    // A declaration already at t closes the registry immediately.
    state.status = detail::closure_reached(state, params) ? CtaStatus::Succeeded
                                                          : CtaStatus::Open;
    return state;
}

// Responses after closure leave the state unchanged so batch drivers need no
// special casing for stragglers.
inline CtaState apply_response(CtaState state, const DeclaredResponse& response,
                               const ProtocolParams& params) {
    if (response.declared < 0 || response.declared > params.grid)
        throw std::invalid_argument("apply_response: declared power off the epsilon grid");
    if (state.contains(response.node))
        throw std::invalid_argument("apply_response: node " +
                                    std::to_string(response.node) + " already responded");
    if (state.status != CtaStatus::Open) return state;

    state.coalition.push_back(response.node);
    state.declared_total += response.declared;
    if (detail::closure_reached(state, params)) state.status = CtaStatus::Succeeded;
    return state;
}

// Closure is evaluated eagerly on every mutation, so an Open state at the
// timeout has not met its termination condition and aborts. Under PowerOnly
// this is exactly the "V < t and clock >= T" branch; under PowerAndVisibility
// it also covers registries stuck above t with too many nodes excluded.
inline CtaState tick(CtaState state, const ProtocolParams& params) {
    if (state.status != CtaStatus::Open)
        throw std::logic_error("tick: contract is not open");
    state.clock += 1;
    if (state.clock >= params.timeout_blocks) state.status = CtaStatus::Aborted;
    return state;
}

struct OutcomeRecord {
    bool success = false;
    std::vector<NodeId> coalition;
    std::vector<NodeId> excluded;
    Rat coalition_true_power;
    ResponseOrder order_used;
};

// One resolved play: responses applied in `order`, one clock tick per
// response, idle ticks afterwards until closure or timeout. `responses[i]`
// is node i's declared power, nullopt for nodes that do not respond; the
// launcher's entry is ignored. `order` must permute exactly the responding
// nodes.
inline OutcomeRecord run_contract(const PowerDistribution& powers, NodeId launcher,
                                  PowerUnits launcher_declared,
                                  const std::vector<std::optional<PowerUnits>>& responses,
                                  const ResponseOrder& order, const ProtocolParams& params) {
    const std::size_t n = powers.n();
    if (responses.size() != n)
        throw std::invalid_argument("run_contract: responses size mismatch");

    std::size_t expected_responders = 0;
    for (NodeId i = 0; i < n; ++i)
        if (i != launcher && responses[i].has_value()) ++expected_responders;
    if (order.nodes.size() != expected_responders)
        throw std::invalid_argument("run_contract: order must permute the responding nodes");
    for (NodeId node : order.nodes) {
        if (node == launcher || static_cast<std::size_t>(node) >= n ||
            !responses[node].has_value())
            throw std::invalid_argument("run_contract: order contains a non-responder");
    }

    CtaState state = launch(launcher, launcher_declared, n, params);
    for (NodeId node : order.nodes) {
        if (state.status != CtaStatus::Open) break; // late responses are dropped
        state = apply_response(state, {node, *responses[node]}, params);
        if (state.status == CtaStatus::Open) state = tick(state, params);
    }
    while (state.status == CtaStatus::Open) state = tick(state, params);

    OutcomeRecord record;
    record.order_used = order;
    record.coalition = state.coalition;
    PowerUnits true_units = 0;
    for (NodeId node : state.coalition) true_units += powers.units(node);
    record.coalition_true_power = Rat{true_units, powers.grid()};
    // Declared power gates admission; true power gates functional success.
    record.success = state.status == CtaStatus::Succeeded &&
                     reaches_threshold(true_units, powers.grid(), params.t);
    for (NodeId i = 0; i < n; ++i)
        if (!state.contains(i)) record.excluded.push_back(i);
    return record;
}

// Uniform random permutation of the responder set; deterministic given the
// shuffle seed. The order distribution is unknowable in the field, uniform is
// what the verification uses (see ShuffleSource for biased experiments).
inline ResponseOrder sample_order(const std::vector<NodeId>& responders,
                                  const ShuffleSource& source) {
    if (responders.empty())
        throw std::invalid_argument("sample_order: empty responder set");
    ResponseOrder order;
    order.nodes = responders;
    std::sort(order.nodes.begin(), order.nodes.end());
    auto rng = source.engine();
    fisher_yates(order.nodes, rng);
    return order;
}

// All permutations of the responder set in lexicographic order, for exact
// enumeration over the chance vertices.
inline std::vector<ResponseOrder> all_orders(std::vector<NodeId> responders) {
    std::sort(responders.begin(), responders.end());
    std::vector<ResponseOrder> orders;
    if (responders.empty()) {
        orders.push_back(ResponseOrder{});
        return orders;
    }
    do {
        orders.push_back(ResponseOrder{responders});
    } while (std::next_permutation(responders.begin(), responders.end()));
    return orders;
}

} // namespace censim
