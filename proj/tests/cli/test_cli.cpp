// End-to-end checks of the installed binary: exit codes, output files, and
// byte-level reproducibility. Paths come from the build system through
// CENSIM_BIN and CENSIM_DATA.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

std::string env_or_fail(const char* name) {
    const char* value = std::getenv(name);
    REQUIRE(value != nullptr);
    return value;
}

struct CommandResult {
    int exit_code;
    std::string output;
};

CommandResult run_cli(const std::string& args) {
    const std::string bin = env_or_fail("CENSIM_BIN");
    const std::string out_path = "cli_test_output.txt";
    const std::string command = bin + " " + args + " > " + out_path + " 2>&1";
    const int status = std::system(command.c_str());
    std::ifstream in(out_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    int code = -1;
    if (WIFEXITED(status)) code = WEXITSTATUS(status);
    return {code, buffer.str()};
}

std::string data_file(const std::string& name) {
    return env_or_fail("CENSIM_DATA") + "/" + name;
}

} // namespace

TEST_CASE("exit code contract") {
    CHECK(run_cli("verify-ne " + data_file("ne_n3.scenario")).exit_code == 0);
    CHECK(run_cli("verify-spe " + data_file("spe_n3.scenario")).exit_code == 0);
    CHECK(run_cli("verify-ne " + data_file("broken.scenario")).exit_code == 2);
    CHECK(run_cli("verify-ne " + data_file("bad_threshold.scenario")).exit_code == 3);
    CHECK(run_cli("verify-ne " + data_file("negative_control.scenario")).exit_code == 4);
    CHECK(run_cli("verify-ne no_such_file.scenario").exit_code == 2);
}

TEST_CASE("subcommand and scenario experiment must agree") {
    auto result = run_cli("verify-spe " + data_file("ne_n3.scenario"));
    CHECK(result.exit_code == 2);
    CHECK(result.output.find("does not match") != std::string::npos);
}

TEST_CASE("negative control reports its witnesses in the payload") {
    auto result = run_cli("verify-ne " + data_file("negative_control.scenario"));
    REQUIRE(result.exit_code == 4);
    auto doc = nlohmann::json::parse(result.output);
    CHECK(doc["payload"]["holds"] == false);
    CHECK(doc["payload"]["witnesses"].size() > 0);
}

TEST_CASE("simulate writes a CSV ledger via --format and --out") {
    const std::string out = "cli_test_ledger.csv";
    auto result =
        run_cli("simulate " + data_file("sim_attack.scenario") + " --format csv --out " + out);
    REQUIRE(result.exit_code == 0);
    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    CHECK(header == "node_id,true_power,total_reward,total_cost,avg_utility");
    int rows = 0;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) ++rows;
    CHECK(rows == 3);
}

TEST_CASE("same seed gives byte-identical payloads, overrides change them") {
    auto a = run_cli("simulate " + data_file("sim_attack.scenario"));
    auto b = run_cli("simulate " + data_file("sim_attack.scenario"));
    REQUIRE(a.exit_code == 0);
    auto doc_a = nlohmann::json::parse(a.output);
    auto doc_b = nlohmann::json::parse(b.output);
    CHECK(doc_a["payload"].dump() == doc_b["payload"].dump());

    auto c = run_cli("simulate " + data_file("sim_attack.scenario") + " --seed 999");
    auto doc_c = nlohmann::json::parse(c.output);
    CHECK(doc_a["payload"].dump() != doc_c["payload"].dump());
    CHECK(doc_c["seed"] == 999);
}

TEST_CASE("sweep emits one deterministic row per grid scenario") {
    auto result = run_cli("sweep " + data_file("sweep_n3.scenario") + " --format csv");
    REQUIRE(result.exit_code == 0);
    CHECK(result.output.find("index,powers,holds") == 0);
    CHECK(result.output.find("1/4|1/4|1/2,true") != std::string::npos);

    auto again = run_cli("sweep " + data_file("sweep_n3.scenario") + " --format csv");
    CHECK(result.output == again.output);
}

TEST_CASE("multi-contract all-join verification passes on the stable scenario") {
    auto result = run_cli("multi-contract " + data_file("multi_n5.scenario"));
    REQUIRE(result.exit_code == 0);
    auto doc = nlohmann::json::parse(result.output);
    CHECK(doc["payload"]["holds"] == true);
    CHECK(doc["payload"]["mode"] == "verify-ne");
}

TEST_CASE("estimate-eta reads its history from a CSV column") {
    auto result = run_cli("estimate-eta " + data_file("eta.scenario") +
                          " --override history_csv=" + data_file("active_nodes.csv"));
    REQUIRE(result.exit_code == 0);
    auto doc = nlohmann::json::parse(result.output);
    CHECK(doc["payload"]["history_points"] == 6);
    CHECK(doc["payload"]["eta_latency"] == 2);
    CHECK(doc["payload"]["eta"].get<int>() >= 2);
}

TEST_CASE("schema subcommand prints the payload schema") {
    auto result = run_cli("schema");
    REQUIRE(result.exit_code == 0);
    auto doc = nlohmann::json::parse(result.output);
    CHECK(doc.contains("definitions"));
    CHECK(doc["definitions"].contains("outcome_record"));
    CHECK(doc["definitions"].contains("reward_ledger"));
    CHECK(doc["definitions"].contains("winner_report"));
    CHECK(doc["payloads"].contains("verify-ne"));
}
