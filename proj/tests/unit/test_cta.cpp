#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "censim/cta.hpp"

using namespace censim;

namespace {
ProtocolParams basic_params(Rat t = Rat{1, 2}, PowerUnits grid = 20) {
    ProtocolParams params;
    params.t = t;
    params.grid = grid;
    params.eta = 2;
    params.timeout_blocks = 10;
    return params;
}
} // namespace

TEST_CASE("launch opens the registry with the launcher's declaration") {
    auto params = basic_params();
    auto state = launch(0, 8, 3, params); // 8/20 = 0.4
    CHECK(state.status == CtaStatus::Open);
    CHECK(state.declared_total == 8);
    CHECK(state.coalition == std::vector<NodeId>{0});
    CHECK(state.clock == 0);

    auto zero = launch(0, 0, 3, params);
    CHECK(zero.status == CtaStatus::Open);
    CHECK(zero.declared_total == 0);

    CHECK_THROWS_AS(launch(0, 21, 3, params), std::invalid_argument); // off grid
    CHECK_THROWS_AS(launch(5, 4, 3, params), std::invalid_argument);
}

TEST_CASE("a launch declaration at t closes the registry immediately") {
    auto params = basic_params(Rat{1, 2}, 2);
    auto state = launch(0, 1, 2, params); // declares 1/2 with t = 1/2
    CHECK(state.status == CtaStatus::Succeeded);
}

TEST_CASE("apply_response crosses the threshold") {
    auto params = basic_params();
    auto state = launch(0, 8, 3, params);

    SECTION("crossing response closes the contract") {
        state = apply_response(state, {2, 7}, params); // 0.4 + 0.35 >= 0.5
        CHECK(state.status == CtaStatus::Succeeded);
        CHECK(state.declared_total == 15);
        CHECK(state.coalition == std::vector<NodeId>{0, 2});
    }
    SECTION("zero declaration joins without closing") {
        state = apply_response(state, {2, 0}, params);
        CHECK(state.status == CtaStatus::Open);
        CHECK(state.declared_total == 8);
        CHECK(state.coalition == std::vector<NodeId>{0, 2});
    }
    SECTION("duplicate responder rejected") {
        state = apply_response(state, {2, 0}, params);
        CHECK_THROWS_AS(apply_response(state, {2, 1}, params), std::invalid_argument);
    }
    SECTION("late response leaves a closed contract unchanged") {
        state = apply_response(state, {2, 7}, params);
        auto after = apply_response(state, {1, 7}, params);
        CHECK(after.coalition == state.coalition);
        CHECK(after.declared_total == state.declared_total);
    }
}

TEST_CASE("power-and-visibility keeps admitting until few enough are excluded") {
    auto params = basic_params(Rat{1, 2}, 4);
    params.policy = TerminationPolicy::PowerAndVisibility;
    params.eta = 1; // excluding anyone is visible
    auto state = launch(0, 1, 4, params); // four nodes at 1/4 each
    state = apply_response(state, {1, 1}, params);
    CHECK(state.status == CtaStatus::Open); // V = 1/2 >= t but 2 excluded >= eta
    state = apply_response(state, {2, 1}, params);
    CHECK(state.status == CtaStatus::Open); // 1 excluded >= eta
    state = apply_response(state, {3, 1}, params);
    CHECK(state.status == CtaStatus::Succeeded); // everyone in
}

TEST_CASE("power-and-visibility aborts at the timeout when stuck above t") {
    // one node never responds, so the visibility condition is unsatisfiable
    // even though declared power passes t; the registry must still expire
    auto params = basic_params(Rat{1, 2}, 4);
    params.policy = TerminationPolicy::PowerAndVisibility;
    params.eta = 1;
    params.timeout_blocks = 6;
    auto powers = PowerDistribution({1, 1, 1, 1}, 4);
    std::vector<std::optional<PowerUnits>> responses{std::nullopt, 1, 1, std::nullopt};
    auto record = run_contract(powers, 0, 1, responses, ResponseOrder{{1, 2}}, params);
    CHECK_FALSE(record.success);
    CHECK(record.coalition == std::vector<NodeId>{0, 1, 2});
}

TEST_CASE("tick advances the clock and aborts at the timeout") {
    auto params = basic_params();
    auto state = launch(0, 6, 3, params); // 0.3 < t
    state.clock = params.timeout_blocks - 1;
    state = tick(state, params);
    CHECK(state.status == CtaStatus::Aborted);

    auto early = launch(0, 6, 3, params);
    early = tick(early, params);
    CHECK(early.status == CtaStatus::Open);
    CHECK(early.clock == 1);

    auto closed = launch(0, 10, 3, params);
    CHECK_THROWS_AS(tick(closed, params), std::logic_error);
}

TEST_CASE("run_contract resolves the truthful 3-node play") {
    auto powers = PowerDistribution::from_fractions({0.4, 0.35, 0.25}, 20);
    auto params = basic_params();
    std::vector<std::optional<PowerUnits>> responses{std::nullopt, 7, 5};

    auto record = run_contract(powers, 0, 8, responses, ResponseOrder{{1, 2}}, params);
    CHECK(record.success);
    CHECK(record.coalition == std::vector<NodeId>{0, 1});
    CHECK(record.excluded == std::vector<NodeId>{2});
    CHECK(record.coalition_true_power == Rat{3, 4});

    auto other = run_contract(powers, 0, 8, responses, ResponseOrder{{2, 1}}, params);
    CHECK(other.success);
    CHECK(other.coalition == std::vector<NodeId>{0, 2});
    CHECK(other.coalition_true_power == Rat{13, 20});
}

TEST_CASE("over-declaration can close the registry on insufficient true power") {
    // x2 declares 0.4 while holding 0.3; declared crosses t=0.65 but the
    // admitted coalition's true power is only 0.6
    auto powers = PowerDistribution::from_fractions({0.3, 0.3, 0.4}, 20);
    auto params = basic_params(Rat{13, 20});
    std::vector<std::optional<PowerUnits>> responses{std::nullopt, 8, 8};

    auto record = run_contract(powers, 0, 6, responses, ResponseOrder{{1, 2}}, params);
    CHECK_FALSE(record.success);
    CHECK(record.coalition == std::vector<NodeId>{0, 1});
    CHECK(record.coalition_true_power == Rat{3, 5});
}

TEST_CASE("a contract nobody answers aborts at the timeout") {
    auto powers = PowerDistribution::from_fractions({0.4, 0.35, 0.25}, 20);
    auto params = basic_params();
    params.timeout_blocks = 5;
    std::vector<std::optional<PowerUnits>> responses{std::nullopt, std::nullopt, std::nullopt};
    auto record = run_contract(powers, 0, 8, responses, ResponseOrder{}, params);
    CHECK_FALSE(record.success);
    CHECK(record.coalition == std::vector<NodeId>{0});
    CHECK(record.excluded == std::vector<NodeId>{1, 2});
}

TEST_CASE("run_contract validates the order against the responder set") {
    auto powers = PowerDistribution::from_fractions({0.4, 0.35, 0.25}, 20);
    auto params = basic_params();
    std::vector<std::optional<PowerUnits>> responses{std::nullopt, 7, std::nullopt};
    CHECK_THROWS_AS(run_contract(powers, 0, 8, responses, ResponseOrder{{1, 2}}, params),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_contract(powers, 0, 8, responses, ResponseOrder{}, params),
                    std::invalid_argument);
}

TEST_CASE("prefix minimality: dropping the last joiner falls below t") {
    // property over every truthful scenario on a small grid
    ProtocolParams params = basic_params(Rat{1, 2}, 8);
    params.eta = 4;
    for (const auto& powers : power_grid(4, 8, params)) {
        std::vector<std::optional<PowerUnits>> responses(4);
        for (NodeId i = 1; i < 4; ++i) responses[i] = powers.units(i);
        for (const auto& order : all_orders({1, 2, 3})) {
            auto record = run_contract(powers, 0, powers.units(0), responses, order, params);
            REQUIRE(record.success);
            PowerUnits declared = 0;
            for (NodeId node : record.coalition) declared += powers.units(node);
            REQUIRE(reaches_threshold(declared, 8, params.t));
            if (record.coalition.size() > 1) {
                declared -= powers.units(record.coalition.back());
                REQUIRE_FALSE(reaches_threshold(declared, 8, params.t));
            }
        }
    }
}

TEST_CASE("declared totals never decrease and closed state is immutable") {
    auto params = basic_params();
    auto state = launch(0, 2, 6, params);
    PowerUnits last = state.declared_total;
    for (NodeId node = 1; node < 5; ++node) {
        state = apply_response(state, {node, static_cast<PowerUnits>(node)}, params);
        CHECK(state.declared_total >= last);
        last = state.declared_total;
    }
    CHECK(state.status == CtaStatus::Succeeded);
    auto frozen = state;
    // responses from a node not yet seen leave the closed registry unchanged
    CHECK(apply_response(state, {5, 3}, params).coalition == frozen.coalition);
    CHECK(apply_response(state, {5, 3}, params).declared_total == frozen.declared_total);
}

TEST_CASE("sample_order is deterministic per seed and uniform across seeds") {
    std::vector<NodeId> responders{1, 2, 3};

    auto a = sample_order(responders, ShuffleSource{42});
    auto b = sample_order(responders, ShuffleSource{42});
    CHECK(a.nodes == b.nodes);

    auto single = sample_order({7}, ShuffleSource{1});
    CHECK(single.nodes == std::vector<NodeId>{7});

    CHECK_THROWS_AS(sample_order({}, ShuffleSource{1}), std::invalid_argument);

    // frequency test: each of the 6 permutations within 4 standard errors of 1/6
    const int trials = 60000;
    std::map<std::vector<NodeId>, int> counts;
    for (int i = 0; i < trials; ++i)
        counts[sample_order(responders, ShuffleSource{static_cast<std::uint64_t>(i)}).nodes]++;
    REQUIRE(counts.size() == 6);
    const double p = 1.0 / 6.0;
    const double stderr_bound = 4.0 * std::sqrt(p * (1 - p) / trials);
    for (const auto& [perm, count] : counts) {
        CHECK_THAT(static_cast<double>(count) / trials,
                   Catch::Matchers::WithinAbs(p, stderr_bound));
    }
}

TEST_CASE("run_contract is a pure function of its inputs") {
    auto powers = PowerDistribution::from_fractions({0.4, 0.35, 0.25}, 20);
    auto params = basic_params();
    std::vector<std::optional<PowerUnits>> responses{std::nullopt, 7, 5};
    auto r1 = run_contract(powers, 0, 8, responses, ResponseOrder{{2, 1}}, params);
    auto r2 = run_contract(powers, 0, 8, responses, ResponseOrder{{2, 1}}, params);
    CHECK(r1.success == r2.success);
    CHECK(r1.coalition == r2.coalition);
    CHECK(r1.excluded == r2.excluded);
    CHECK(r1.coalition_true_power == r2.coalition_true_power);
}
