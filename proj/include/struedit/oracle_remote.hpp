#pragma once

// Chat-completion HTTP client. The endpoint is configurable so open and
// closed models are interchangeable: system/user text map onto the role-
// tagged message array, the reply is the first choice's message content.
//
// Retry policy: transport failures retry with exponential backoff starting
// at 1 s, up to max_retries. Any well-formed HTTP response — success or
// error status — is terminal; malformed content is the caller's problem.

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "struedit/oracle.hpp"

namespace struedit {

namespace detail {

struct EndpointParts {
    std::string scheme_host_port;  // e.g. "http://localhost:8080"
    std::string path;              // e.g. "/v1/chat/completions"
};

inline EndpointParts split_endpoint(const std::string& url) {
    std::size_t scheme_end = url.find("://");
    std::size_t path_start =
        url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    EndpointParts parts;
    if (path_start == std::string::npos || path_start + 1 >= url.size()) {
        parts.scheme_host_port =
            path_start == std::string::npos ? url : url.substr(0, path_start);
        parts.path = "/v1/chat/completions";
    } else {
        parts.scheme_host_port = url.substr(0, path_start);
        parts.path = url.substr(path_start);
    }
    return parts;
}

}  // namespace detail

class RemoteOracle final : public Oracle {
public:
    explicit RemoteOracle(OracleConfig config) : config_(std::move(config)) {
        if (config_.endpoint_url.empty()) {
            if (const char* env = std::getenv("ORACLE_ENDPOINT")) config_.endpoint_url = env;
        }
        if (config_.api_key.empty()) {
            if (const char* env = std::getenv("ORACLE_API_KEY")) config_.api_key = env;
        }
        if (config_.endpoint_url.empty()) {
            throw Error(FailureReason::oracle_unavailable,
                        "no endpoint configured (set --endpoint or ORACLE_ENDPOINT)");
        }
        config_.validate();
    }

    const OracleConfig& config() const { return config_; }

    OracleResponse complete(const OracleRequest& request) override {
        request.validate();
        const std::string body = build_body(request);
        const detail::EndpointParts endpoint = detail::split_endpoint(config_.endpoint_url);

        auto started = std::chrono::steady_clock::now();
        std::string last_error = "transport failure";
        bool timed_out = false;
        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(
                    std::chrono::duration<double>(backoff_seconds(attempt)));
            }
            // A fresh client per call keeps concurrent complete() calls independent.
            httplib::Client client(endpoint.scheme_host_port);
            client.set_connection_timeout(std::chrono::duration<double>(config_.timeout_seconds));
            client.set_read_timeout(std::chrono::duration<double>(config_.timeout_seconds));
            httplib::Headers headers;
            if (!config_.api_key.empty()) {
                headers.emplace("Authorization", "Bearer " + config_.api_key);
            }
            auto result = client.Post(endpoint.path, headers, body, "application/json");
            if (!result) {
                timed_out = result.error() == httplib::Error::ConnectionTimeout ||
                            result.error() == httplib::Error::Read;
                last_error = httplib::to_string(result.error());
                continue;
            }
            double latency = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - started)
                                 .count();
            if (result->status != 200) {
                throw Error(FailureReason::oracle_unavailable,
                            "endpoint returned HTTP " + std::to_string(result->status));
            }
            return parse_body(result->body, latency);
        }
        throw Error(timed_out ? FailureReason::oracle_timeout : FailureReason::oracle_unavailable,
                    "transport exhausted after " + std::to_string(config_.max_retries + 1) +
                        " attempt(s): " + last_error);
    }

private:
    static double backoff_seconds(int attempt) {
        return static_cast<double>(1u << (attempt - 1));  // 1 s, 2 s, 4 s, ...
    }

    std::string build_body(const OracleRequest& request) const {
        nlohmann::json messages = nlohmann::json::array();
        if (!request.system_text.empty()) {
            messages.push_back({{"role", "system"}, {"content", request.system_text}});
        }
        messages.push_back({{"role", "user"}, {"content", request.user_text}});
        nlohmann::json body{{"model", config_.model_name},
                            {"messages", std::move(messages)},
                            {"temperature", request.temperature},
                            {"max_tokens", request.max_output_tokens}};
        return body.dump();
    }

    static OracleResponse parse_body(const std::string& body, double latency) {
        nlohmann::json payload;
        try {
            payload = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& ex) {
            throw Error(FailureReason::oracle_unavailable,
                        std::string("unparseable completion body: ") + ex.what());
        }
        if (!payload.contains("choices") || payload["choices"].empty()) {
            throw Error(FailureReason::oracle_unavailable, "completion body has no choices");
        }
        OracleResponse response;
        response.latency_seconds = latency;
        const auto& first = payload["choices"][0];
        if (first.contains("message") && first["message"].contains("content")) {
            response.text = first["message"]["content"].get<std::string>();
        } else if (first.contains("text")) {
            response.text = first["text"].get<std::string>();
        } else {
            throw Error(FailureReason::oracle_unavailable, "first choice has no content");
        }
        if (payload.contains("usage")) {
            const auto& usage = payload["usage"];
            response.token_counts = std::make_pair(usage.value("prompt_tokens", 0L),
                                                   usage.value("completion_tokens", 0L));
        }
        return response;
    }

    OracleConfig config_;
};

}  // namespace struedit
