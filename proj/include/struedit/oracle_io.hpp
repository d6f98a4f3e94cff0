#pragma once

// Scripted-oracle fixtures on disk:
//   { "rules": [{"match": "...", "response": "...", "exact": false}, ...],
//     "fallback": "..." (optional),
//     "latency_seconds": 0.0 (optional) }

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "struedit/oracle.hpp"

namespace struedit {

inline ScriptedOracle load_scripted_oracle(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(FailureReason::oracle_unavailable,
                    "cannot open scripted oracle fixture " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& ex) {
        throw Error(FailureReason::oracle_unavailable,
                    path.string() + " is not valid JSON: " + ex.what());
    }
    if (!doc.is_object() || !doc.contains("rules") || !doc["rules"].is_array()) {
        throw Error(FailureReason::oracle_unavailable,
                    path.string() + ": expected object with a \"rules\" array");
    }
    ScriptedOracle oracle;
    for (const auto& rule : doc["rules"]) {
        oracle.add_rule(rule.at("match").get<std::string>(),
                        rule.at("response").get<std::string>(), rule.value("exact", false));
    }
    if (doc.contains("fallback") && doc["fallback"].is_string()) {
        oracle.set_fallback(doc["fallback"].get<std::string>());
    }
    oracle.set_simulated_latency(doc.value("latency_seconds", 0.0));
    return oracle;
}

inline void save_scripted_oracle(const ScriptedOracle& oracle,
                                 const std::filesystem::path& path) {
    nlohmann::json rules = nlohmann::json::array();
    for (const ScriptedOracle::Rule& rule : oracle.rules()) {
        rules.push_back({{"match", rule.match}, {"response", rule.response}, {"exact", rule.exact}});
    }
    nlohmann::json doc{{"rules", std::move(rules)}};
    if (oracle.fallback()) doc["fallback"] = *oracle.fallback();
    std::ofstream out(path);
    if (!out) {
        throw Error(FailureReason::oracle_unavailable, "cannot write " + path.string());
    }
    out << doc.dump(2) << '\n';
}

}  // namespace struedit
