#include <catch2/catch_amalgamated.hpp>

#include "censim/runner.hpp"

using namespace censim;

namespace {
const char* kReferenceScenario = R"(
# Theorem 1 instance
name = ne_n3
experiment = verify-ne
powers = 0.4, 0.35, 0.25
epsilon = 0.05
t = 0.5
alpha = 100
timeout = 10
seed = 7
)";
}

TEST_CASE("scenario parsing") {
    auto scenario = parse_scenario(kReferenceScenario);
    CHECK(scenario.name == "ne_n3");
    CHECK(scenario.kind == ExperimentKind::VerifyNE);
    REQUIRE(scenario.powers.has_value());
    CHECK(scenario.powers->n() == 3);
    CHECK(scenario.powers->units(0) == 8);
    CHECK(scenario.params.t == Rat{1, 2});
    CHECK(scenario.params.grid == 20);
    CHECK(scenario.params.eta == 3); // defaults to n: undetectable regime
    CHECK(scenario.seed == 7);
}

TEST_CASE("unknown keys and malformed lines are parse errors") {
    CHECK_THROWS_AS(parse_scenario("powerz = 0.5, 0.5"), ParseError);
    CHECK_THROWS_AS(parse_scenario("powers 0.5, 0.5"), ParseError);
    CHECK_THROWS_AS(parse_scenario("t = threeish"), ParseError);
    CHECK_THROWS_AS(parse_scenario("experiment = frobnicate"), ParseError);
    CHECK_THROWS_AS(parse_scenario("t = 0.5\nt = 0.6"), ParseError);
    CHECK_THROWS_AS(parse_scenario("epsilon = 0.3"), ParseError); // 1/eps not integral
}

TEST_CASE("overrides replace file values and reject unknown keys") {
    auto scenario = parse_scenario(kReferenceScenario, {"seed=99", "t=0.6"});
    CHECK(scenario.seed == 99);
    CHECK(scenario.params.t == Rat{3, 5});
    CHECK_THROWS_AS(parse_scenario(kReferenceScenario, {"nope=1"}), ParseError);
    CHECK_THROWS_AS(parse_scenario(kReferenceScenario, {"just-a-word"}), ParseError);
}

TEST_CASE("off-grid powers are a validation error, not a parse error") {
    CHECK_THROWS_AS(parse_scenario("powers = 0.33, 0.67\nepsilon = 0.25"), ValidationError);
}

TEST_CASE("run_scenario dispatches verify-ne and reports success") {
    auto report = run_scenario(parse_scenario(kReferenceScenario));
    CHECK(report.exit_code == kExitOk);
    CHECK(report.kind == "verify-ne");
    CHECK(report.payload["holds"] == true);
    CHECK(report.payload["witnesses"].empty());
    CHECK(report.payload["scenario"]["t"] == "1/2");
}

TEST_CASE("verification failure exits with code 4 and carries witnesses") {
    auto scenario = parse_scenario(kReferenceScenario, {"reward_basis=declared-power"});
    auto report = run_scenario(scenario);
    CHECK(report.exit_code == kExitVerification);
    CHECK(report.payload["holds"] == false);
    CHECK(report.payload["witnesses"].size() > 0);
}

TEST_CASE("invalid scenarios exit with code 3") {
    auto scenario = parse_scenario(kReferenceScenario, {"t=0.4"});
    auto report = run_scenario(scenario);
    CHECK(report.exit_code == kExitValidation);
    CHECK(report.kind == "error");
    CHECK(report.payload["stage"] == "validation");
}

TEST_CASE("simulate scenario produces a ledger consistent with expectations") {
    const char* text = R"(
name = sim_attack
experiment = simulate
powers = 0.4, 0.35, 0.25
epsilon = 0.05
t = 0.5
eta = 2
coalition = 0, 1
horizon = 50000
seed = 3
)";
    auto report = run_scenario(parse_scenario(text));
    REQUIRE(report.exit_code == kExitOk);
    const auto& nodes = report.payload["ledger"]["nodes"];
    REQUIRE(nodes.size() == 3);
    CHECK(nodes[2]["avg_utility"] == 0.0);
    const double u0 = nodes[0]["avg_utility"].get<double>();
    const double expected = 8.0 / 15.0;
    CHECK_THAT(u0, Catch::Matchers::WithinAbs(expected, 4.0 * std::sqrt(0.25 / 50000.0) + 0.01));
    CHECK(report.payload["expected"][0] == "8/15");

    // same seed, byte-identical payload
    auto again = run_scenario(parse_scenario(text));
    CHECK(report.payload.dump() == again.payload.dump());

    // csv rendering
    auto csv_report = run_scenario(parse_scenario(text, {"format=csv"}));
    CHECK(csv_report.csv_output);
    CHECK(csv_report.csv.rfind("node_id,true_power,total_reward,total_cost,avg_utility\n", 0) ==
          0);
}

TEST_CASE("sweep runs every grid scenario and stays deterministic") {
    const char* text = R"(
name = sweep_n3
experiment = verify-ne
grid_n = 3
epsilon = 0.25
t = 0.5
)";
    auto report = run_sweep(parse_scenario(text));
    REQUIRE(report.exit_code == kExitOk);
    REQUIRE(report.payload["rows"].size() == 3);
    for (const auto& row : report.payload["rows"]) {
        CHECK(row["holds"] == true);
        CHECK(row["strict"] == true);
    }

    auto again = run_sweep(parse_scenario(text));
    CHECK(report.payload.dump() == again.payload.dump());

    // single-point grid
    auto single = run_sweep(parse_scenario("experiment = verify-spe\ngrid_n = 2\nepsilon = "
                                           "0.5\nt = 0.5"));
    REQUIRE(single.exit_code == kExitOk);
    CHECK(single.payload["rows"].size() == 1);

    // over-constrained grid errors out before running anything
    auto empty = run_sweep(parse_scenario("experiment = verify-ne\ngrid_n = 2\nepsilon = "
                                          "0.5\nt = 0.6"));
    CHECK(empty.exit_code == kExitValidation);
}

TEST_CASE("multi-contract scenarios run and gate on assumptions") {
    const char* stable = R"(
name = mc_n5
experiment = multi-contract
powers = 0.2, 0.2, 0.2, 0.2, 0.2
epsilon = 0.2
t = 0.6
k = 2
join_model = all-join
)";
    auto report = run_scenario(parse_scenario(stable));
    CHECK(report.exit_code == kExitOk);
    CHECK(report.payload["mode"] == "verify-ne");
    CHECK(report.payload["holds"] == true);

    // n=4 equal powers: coalition minus one member drops below t
    const char* gated = R"(
name = mc_n4
experiment = multi-contract
powers = 0.25, 0.25, 0.25, 0.25
epsilon = 0.25
t = 0.6
k = 2
join_model = all-join
)";
    auto outside = run_scenario(parse_scenario(gated));
    CHECK(outside.exit_code == kExitValidation);
    CHECK(outside.payload["stage"] == "validation");
}

TEST_CASE("estimate-eta scenario") {
    const char* text = R"(
name = eta
experiment = estimate-eta
latency_blocks = 2
z = 3
history = 8, 11
)";
    auto report = run_scenario(parse_scenario(text));
    REQUIRE(report.exit_code == kExitOk);
    CHECK(report.payload["eta"] == 7);
    CHECK(report.payload["eta_latency"] == 2);
}

TEST_CASE("reward-cm scenario") {
    const char* text = R"(
name = cm
experiment = reward-cm
powers = 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1
epsilon = 0.1
t = 0.5
reward = linear:0.1
coalition = 0, 1, 2, 3, 4, 5
)";
    auto report = run_scenario(parse_scenario(text));
    REQUIRE(report.exit_code == kExitOk);
    CHECK(report.payload["condition"]["satisfied_for"] == json({1, 2, 3, 4}));
    REQUIRE(report.payload.contains("profitability"));
    for (const auto& row : report.payload["profitability"]) {
        CHECK(row["attack_profitable"] == false);
    }
}

TEST_CASE("every emitted report validates against the published schema") {
    std::vector<RunReport> reports;
    reports.push_back(run_scenario(parse_scenario(kReferenceScenario)));
    reports.push_back(run_scenario(parse_scenario(
        "experiment = verify-spe\npowers = 0.4, 0.35, 0.25\nepsilon = 0.05\nt = 0.5")));
    reports.push_back(run_scenario(parse_scenario(
        "experiment = simulate\npowers = 0.5, 0.5\nepsilon = 0.5\nt = 0.5\nhorizon = 100")));
    reports.push_back(run_scenario(parse_scenario(
        "experiment = estimate-eta\nlatency_blocks = 2\nhistory = 8, 11")));
    reports.push_back(run_scenario(parse_scenario(
        "experiment = multi-contract\npowers = 0.2, 0.2, 0.2, 0.2, 0.2\nepsilon = 0.2\nt = "
        "0.6\nk = 2\njoin_model = uniform")));
    reports.push_back(run_scenario(parse_scenario(
        "experiment = reward-cm\npowers = 0.25, 0.25, 0.25, 0.25\nepsilon = 0.25\nt = "
        "0.5\nreward = constant:1")));
    reports.push_back(run_sweep(
        parse_scenario("experiment = verify-ne\ngrid_n = 3\nepsilon = 0.25\nt = 0.5")));
    reports.push_back(run_scenario_file("/nonexistent/x.scenario")); // parse error report
    reports.push_back(run_scenario(parse_scenario(kReferenceScenario, {"t=0.4"})));

    for (const auto& report : reports) {
        std::string error;
        const bool ok = validate_report(report.envelope(), &error);
        INFO(report.kind << ": " << error);
        CHECK(ok);
    }

    // version tag present everywhere
    for (const auto& report : reports)
        CHECK(report.envelope()["version"] == std::string(kVersion));
}

TEST_CASE("outcome records serialize to the documented flat shape") {
    auto powers = PowerDistribution::from_fractions({0.4, 0.35, 0.25}, 20);
    ProtocolParams params;
    params.grid = 20;
    params.eta = 3;
    std::vector<std::optional<PowerUnits>> responses{std::nullopt, 7, 5};
    auto record = run_contract(powers, 0, 8, responses, ResponseOrder{{1, 2}}, params);
    auto doc = to_json(record, 42);
    CHECK(doc["success"] == true);
    CHECK(doc["coalition"] == json({0, 1}));
    CHECK(doc["excluded"] == json({2}));
    CHECK(doc["coalition_true_power"] == "3/4");
    CHECK(doc["order"] == json({1, 2}));
    CHECK(doc["seed"] == 42);

    std::string error;
    const auto schema = report_schema();
    CHECK(schema_validate(doc, schema["definitions"]["outcome_record"], schema, "r", &error));
}
