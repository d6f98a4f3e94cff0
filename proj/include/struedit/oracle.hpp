#pragma once

// Language-model oracle contract plus the two in-process implementations:
// a scripted oracle for deterministic tests and a transcript recorder that
// wraps any oracle to account for calls and latency. The HTTP client lives
// in oracle_remote.hpp.

#include <chrono>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "struedit/error.hpp"

namespace struedit {

struct OracleRequest {
    std::string system_text;
    std::string user_text;
    int max_output_tokens = 512;
    double temperature = 0.0;

    void validate() const {
        if (user_text.empty()) throw std::invalid_argument("OracleRequest: user_text is empty");
        if (max_output_tokens <= 0) {
            throw std::invalid_argument("OracleRequest: max_output_tokens must be positive");
        }
        if (temperature < 0.0) {
            throw std::invalid_argument("OracleRequest: temperature must be non-negative");
        }
    }
};

struct OracleResponse {
    std::string text;
    double latency_seconds = 0.0;
    std::optional<std::pair<long, long>> token_counts;  // (input, output)
};

struct OracleConfig {
    std::string endpoint_url;
    std::string model_name;
    double timeout_seconds = 60.0;
    int max_retries = 2;
    double temperature_default = 0.0;
    std::string api_key;  // falls back to ORACLE_API_KEY; never logged

    void validate() const {
        if (timeout_seconds <= 0.0) {
            throw std::invalid_argument("OracleConfig: timeout must be positive");
        }
        if (max_retries < 0) {
            throw std::invalid_argument("OracleConfig: max_retries must be non-negative");
        }
    }
};

class Oracle {
public:
    virtual ~Oracle() = default;
    virtual OracleResponse complete(const OracleRequest& request) = 0;
};

// Rule table over user_text; first matching rule wins, optional fallback.
// A pure function of the request given fixed rules, and safe to share across
// threads once configured.
class ScriptedOracle final : public Oracle {
public:
    struct Rule {
        std::string match;
        std::string response;
        bool exact = false;
    };

    ScriptedOracle() = default;
    explicit ScriptedOracle(std::vector<Rule> rules, std::optional<std::string> fallback = {})
        : rules_(std::move(rules)), fallback_(std::move(fallback)) {}

    void add_rule(std::string match, std::string response, bool exact = false) {
        rules_.push_back(Rule{std::move(match), std::move(response), exact});
    }
    void add_rules(const std::vector<Rule>& rules) {
        rules_.insert(rules_.end(), rules.begin(), rules.end());
    }
    void set_fallback(std::string text) { fallback_ = std::move(text); }
    void set_simulated_latency(double seconds) { simulated_latency_ = seconds; }

    const std::vector<Rule>& rules() const { return rules_; }
    const std::optional<std::string>& fallback() const { return fallback_; }

    OracleResponse complete(const OracleRequest& request) override {
        request.validate();
        for (const Rule& rule : rules_) {
            bool hit = rule.exact ? request.user_text == rule.match
                                  : request.user_text.find(rule.match) != std::string::npos;
            if (hit) return OracleResponse{rule.response, simulated_latency_, std::nullopt};
        }
        if (fallback_) return OracleResponse{*fallback_, simulated_latency_, std::nullopt};
        throw Error(FailureReason::script_miss,
                    "no rule matches request: " + request.user_text.substr(0, 120));
    }

private:
    std::vector<Rule> rules_;
    std::optional<std::string> fallback_;
    double simulated_latency_ = 0.0;
};

// Wraps any oracle, appending (request, response) pairs in call order.
// Appends are serialized; the inner oracle's concurrency contract is
// unchanged.
class TranscriptRecorder final : public Oracle {
public:
    using Entry = std::pair<OracleRequest, OracleResponse>;

    explicit TranscriptRecorder(Oracle& inner) : inner_(inner) {}

    OracleResponse complete(const OracleRequest& request) override {
        OracleResponse response = inner_.complete(request);
        std::lock_guard<std::mutex> lock(mutex_);
        transcript_.emplace_back(request, response);
        return response;
    }

    std::size_t call_count() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return transcript_.size();
    }

    double total_latency_seconds() const {
        std::lock_guard<std::mutex> lock(mutex_);
        double total = 0.0;
        for (const Entry& entry : transcript_) total += entry.second.latency_seconds;
        return total;
    }

    std::vector<Entry> transcript() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return transcript_;
    }

private:
    Oracle& inner_;
    mutable std::mutex mutex_;
    std::vector<Entry> transcript_;
};

}  // namespace struedit
