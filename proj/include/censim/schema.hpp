#pragma once

// Fixed schema for every report payload the runner emits, plus a small
// structural validator (type / properties / required / items / enum / $ref)
// so reports can be checked against the schema in tests and by consumers.

#include <string>

#include <json.hpp>

namespace censim {

using nlohmann::json;

inline json report_schema() {
    json rat = {{"type", "string"}, {"pattern", "rational num[/den]"}};
    json node_array = {{"type", "array"}, {"items", {{"type", "integer"}}}};

    json definitions;
    definitions["rational"] = rat;
    definitions["outcome_record"] = {
        {"type", "object"},
        {"required", {"success", "coalition", "excluded", "coalition_true_power", "order", "seed"}},
        {"properties",
         {{"success", {{"type", "boolean"}}},
          {"coalition", node_array},
          {"excluded", node_array},
          {"coalition_true_power", {{"$ref", "#/definitions/rational"}}},
          {"order", node_array},
          {"seed", {{"type", "integer"}}}}},
    };
    definitions["reward_ledger"] = {
        {"type", "object"},
        {"required", {"blocks", "nodes"}},
        {"properties",
         {{"blocks", {{"type", "integer"}}},
          {"nodes",
           {{"type", "array"},
            {"items",
             {{"type", "object"},
              {"required",
               {"node_id", "true_power", "total_reward", "total_cost", "avg_utility"}},
              {"properties",
               {{"node_id", {{"type", "integer"}}},
                {"true_power", {{"type", "number"}}},
                {"total_reward", {{"type", "number"}}},
                {"total_cost", {{"type", "number"}}},
                {"avg_utility", {{"type", "number"}}}}}}}}}}},
    };
    definitions["winner_report"] = {
        {"type", "object"},
        {"required", {"winner", "no_winner", "uniqueness_violated", "coalition_powers"}},
        {"properties",
         {{"winner", {{"type", {"integer", "null"}}}},
          {"no_winner", {{"type", "boolean"}}},
          {"uniqueness_violated", {{"type", "boolean"}}},
          {"coalition_powers",
           {{"type", "array"}, {"items", {{"$ref", "#/definitions/rational"}}}}}}},
    };
    definitions["deviation_witness"] = {
        {"type", "object"},
        {"required",
         {"node", "original", "deviation", "class", "utility_before", "utility_after",
          "improvement"}},
        {"properties",
         {{"node", {{"type", "integer"}}},
          {"original", {{"type", "object"}}},
          {"deviation", {{"type", "object"}}},
          {"class", {{"type", "string"}}},
          {"utility_before", {{"$ref", "#/definitions/rational"}}},
          {"utility_after", {{"$ref", "#/definitions/rational"}}},
          {"improvement", {{"$ref", "#/definitions/rational"}}}}},
    };
    definitions["enumeration_stats"] = {
        {"type", "object"},
        {"required", {"profiles_evaluated", "orders_walked", "deviations_checked"}},
        {"properties",
         {{"profiles_evaluated", {{"type", "integer"}}},
          {"orders_walked", {{"type", "integer"}}},
          {"deviations_checked", {{"type", "integer"}}}}},
    };
    definitions["scenario_header"] = {
        {"type", "object"},
        {"required", {"powers", "t", "eta", "alpha", "epsilon"}},
        {"properties",
         {{"powers", {{"type", "array"}, {"items", {{"$ref", "#/definitions/rational"}}}}},
          {"t", {{"$ref", "#/definitions/rational"}}},
          {"eta", {{"type", "integer"}}},
          {"alpha", {{"$ref", "#/definitions/rational"}}},
          {"epsilon", {{"$ref", "#/definitions/rational"}}}}},
    };

    json payloads;
    payloads["simulate"] = {
        {"type", "object"},
        {"required", {"ledger", "expected", "excluded_count", "regime"}},
        {"properties",
         {{"ledger", {{"$ref", "#/definitions/reward_ledger"}}},
          {"expected", {{"type", "array"}, {"items", {{"$ref", "#/definitions/rational"}}}}},
          {"excluded_count", {{"type", "integer"}}},
          {"regime",
           {{"type", "object"},
            {"required", {"active", "coalition", "trigger_block"}},
            {"properties",
             {{"active", {{"type", "boolean"}}},
              {"coalition", node_array},
              {"trigger_block", {{"type", "integer"}}}}}}}}},
    };
    payloads["verify-ne"] = {
        {"type", "object"},
        {"required", {"scenario", "holds", "witnesses", "enumeration_stats"}},
        {"properties",
         {{"scenario", {{"$ref", "#/definitions/scenario_header"}}},
          {"holds", {{"type", "boolean"}}},
          {"witnesses",
           {{"type", "array"}, {"items", {{"$ref", "#/definitions/deviation_witness"}}}}},
          {"enumeration_stats", {{"$ref", "#/definitions/enumeration_stats"}}}}},
    };
    payloads["verify-spe"] = {
        {"type", "object"},
        {"required",
         {"scenario", "holds", "witnesses", "enumeration_stats", "launcher_attack_utility",
          "launcher_honest_utility", "strict"}},
        {"properties",
         {{"scenario", {{"$ref", "#/definitions/scenario_header"}}},
          {"holds", {{"type", "boolean"}}},
          {"witnesses",
           {{"type", "array"}, {"items", {{"$ref", "#/definitions/deviation_witness"}}}}},
          {"enumeration_stats", {{"$ref", "#/definitions/enumeration_stats"}}},
          {"launcher_attack_utility", {{"$ref", "#/definitions/rational"}}},
          {"launcher_honest_utility", {{"$ref", "#/definitions/rational"}}},
          {"strict", {{"type", "boolean"}}}}},
    };
    payloads["multi-contract"] = {
        {"type", "object"},
        {"required", {"scenario", "mode"}},
        {"properties",
         {{"scenario", {{"$ref", "#/definitions/scenario_header"}}},
          {"mode", {{"type", "string"},
                    {"enum", {"resolve", "win-probability", "verify-ne"}}}}}},
    };
    payloads["reward-cm"] = {
        {"type", "object"},
        {"required", {"scenario", "reward", "condition"}},
        {"properties",
         {{"scenario", {{"$ref", "#/definitions/scenario_header"}}},
          {"reward", {{"type", "string"}}},
          {"condition",
           {{"type", "object"},
            {"required", {"satisfied_for", "violated_for"}},
            {"properties",
             {{"satisfied_for", node_array}, {"violated_for", node_array}}}}},
          {"profitability", {{"type", "array"}}}}},
    };
    payloads["estimate-eta"] = {
        {"type", "object"},
        {"required", {"eta", "eta_latency", "eta_variance", "history_points"}},
        {"properties",
         {{"eta", {{"type", "integer"}}},
          {"eta_latency", {{"type", "integer"}}},
          {"eta_variance", {{"type", "integer"}}},
          {"history_points", {{"type", "integer"}}}}},
    };
    payloads["sweep"] = {
        {"type", "object"},
        {"required", {"rows"}},
        {"properties", {{"rows", {{"type", "array"}}}}},
    };
    payloads["error"] = {
        {"type", "object"},
        {"required", {"stage", "message"}},
        {"properties",
         {{"stage", {{"type", "string"}, {"enum", {"parse", "validation", "verification"}}}},
          {"message", {{"type", "string"}}}}},
    };

    return json{
        {"schema", "censim-report/1"},
        {"envelope",
         {{"type", "object"},
          {"required", {"scenario", "kind", "duration_ms", "seed", "version", "payload"}},
          {"properties",
           {{"scenario", {{"type", "string"}}},
            {"kind", {{"type", "string"}}},
            {"duration_ms", {{"type", "number"}}},
            {"seed", {{"type", "integer"}}},
            {"version", {{"type", "string"}}},
            {"payload", {{"type", "object"}}}}}}},
        {"payloads", payloads},
        {"definitions", definitions},
    };
}

// Structural validation; returns false and fills `error` on the first
// mismatch. Supports the subset of JSON-Schema keywords the report schema
// uses.
inline bool schema_validate(const json& instance, const json& schema, const json& root,
                            std::string path, std::string* error) {
    auto fail = [&](const std::string& why) {
        if (error) *error = path + ": " + why;
        return false;
    };

    if (schema.contains("$ref")) {
        const std::string ref = schema["$ref"].get<std::string>();
        const std::string prefix = "#/definitions/";
        if (ref.rfind(prefix, 0) != 0) return fail("unsupported $ref " + ref);
        const std::string name = ref.substr(prefix.size());
        if (!root.contains("definitions") || !root["definitions"].contains(name))
            return fail("dangling $ref " + ref);
        return schema_validate(instance, root["definitions"][name], root, path, error);
    }

    if (schema.contains("type")) {
        auto matches = [&](const std::string& type) {
            if (type == "object") return instance.is_object();
            if (type == "array") return instance.is_array();
            if (type == "string") return instance.is_string();
            if (type == "boolean") return instance.is_boolean();
            if (type == "integer") return instance.is_number_integer();
            if (type == "number") return instance.is_number();
            if (type == "null") return instance.is_null();
            return false;
        };
        const json& type = schema["type"];
        bool ok = false;
        if (type.is_string()) {
            ok = matches(type.get<std::string>());
        } else {
            for (const auto& t : type)
                if (matches(t.get<std::string>())) ok = true;
        }
        if (!ok) return fail("type mismatch, expected " + type.dump());
    }

    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& candidate : schema["enum"])
            if (instance == candidate) ok = true;
        if (!ok) return fail("value " + instance.dump() + " not in enum");
    }

    if (schema.contains("required")) {
        for (const auto& key : schema["required"]) {
            if (!instance.is_object() || !instance.contains(key.get<std::string>()))
                return fail("missing required key '" + key.get<std::string>() + "'");
        }
    }

    if (schema.contains("properties") && instance.is_object()) {
        for (const auto& [key, sub] : schema["properties"].items()) {
            if (!instance.contains(key)) continue;
            if (!schema_validate(instance[key], sub, root, path + "/" + key, error))
                return false;
        }
    }

    if (schema.contains("items") && instance.is_array()) {
        std::size_t idx = 0;
        for (const auto& element : instance) {
            if (!schema_validate(element, schema["items"], root,
                                 path + "/" + std::to_string(idx), error))
                return false;
            ++idx;
        }
    }

    return true;
}

// Validates a full report (envelope plus kind-specific payload).
inline bool validate_report(const json& report, std::string* error) {
    const json schema = report_schema();
    if (!schema_validate(report, schema["envelope"], schema, "envelope", error)) return false;
    const std::string kind = report.value("kind", "");
    const json& payloads = schema["payloads"];
    if (!payloads.contains(kind)) {
        if (error) *error = "no payload schema for kind '" + kind + "'";
        return false;
    }
    return schema_validate(report["payload"], payloads[kind], schema, "payload", error);
}

} // namespace censim
