#pragma once

// Benchmark harness: builds per-case edit memories, runs struedit or the ICE
// baseline over every case with bounded concurrency, and aggregates an
// accuracy/latency report.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "struedit/clock.hpp"
#include "struedit/error.hpp"
#include "struedit/ice_baseline.hpp"
#include "struedit/knowledge_structure.hpp"
#include "struedit/mquake.hpp"
#include "struedit/pipeline.hpp"

namespace struedit {

enum class SystemKind { struedit, ice_baseline };
enum class MemoryMode { relevant_only, full, fixed_count };

inline std::string to_string(SystemKind kind) {
    return kind == SystemKind::struedit ? "struedit" : "ice";
}

struct HarnessConfig {
    SystemKind system = SystemKind::struedit;
    MemoryMode memory_mode = MemoryMode::relevant_only;
    std::size_t fixed_count = 1;
    bool full_includes_originals = true;
    bool require_all_paraphrases = false;
    std::size_t concurrency_limit = 1;
    std::uint64_t seed = 0;
    std::size_t retrieval_k = 4;
    PipelineConfig pipeline;

    void validate() const {
        if (concurrency_limit < 1) {
            throw std::invalid_argument("HarnessConfig: concurrency_limit must be >= 1");
        }
        if (memory_mode == MemoryMode::fixed_count && fixed_count < 1) {
            throw std::invalid_argument("HarnessConfig: fixed_count must be >= 1");
        }
        pipeline.validate();
    }

    std::string memory_label() const {
        switch (memory_mode) {
            case MemoryMode::relevant_only: return "relevant";
            case MemoryMode::full: return "full";
            case MemoryMode::fixed_count: return "count:" + std::to_string(fixed_count);
        }
        return "relevant";
    }
};

// ---------------------------------------------------------------------------
// Edit memory construction
// ---------------------------------------------------------------------------

namespace detail {

// Replays a set of cases onto a base: each case's rewrites first, then its
// post-edit chain, so the chain's new facts (which are not themselves
// rewrites) become traversable. Later cases win conflicts.
inline std::vector<EditOperation> case_edits(const MultiHopCase& item) {
    std::vector<EditOperation> edits = item.rewrites;
    for (const FactTriple& triple : item.edited_triples) {
        edits.push_back(EditOperation::replace(triple.subject.display, triple.relation.display,
                                               triple.object.display));
    }
    return edits;
}

inline std::vector<std::size_t> sample_case_indices(std::size_t total, std::size_t focus,
                                                    std::size_t count, std::uint64_t seed) {
    std::vector<std::size_t> indices(total);
    std::iota(indices.begin(), indices.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i = total; i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(indices[i - 1], indices[j]);
    }
    if (count > total) count = total;
    indices.resize(count);
    if (std::find(indices.begin(), indices.end(), focus) == indices.end()) {
        indices.back() = focus;
    }
    std::sort(indices.begin(), indices.end());
    return indices;
}

}  // namespace detail

inline std::pair<KnowledgeStructure, EditMemory> build_edit_memory(
    const std::vector<MultiHopCase>& cases, std::size_t focus_index,
    const HarnessConfig& config) {
    if (focus_index >= cases.size()) {
        throw std::invalid_argument("build_edit_memory: focus_index out of range");
    }
    const MultiHopCase& focus = cases[focus_index];

    if (config.memory_mode == MemoryMode::relevant_only) {
        EditMemory memory;
        for (const EditOperation& rewrite : focus.rewrites) memory.add(rewrite.as_triple());
        return {build_structure(focus.edited_triples), std::move(memory)};
    }

    std::vector<std::size_t> selected;
    if (config.memory_mode == MemoryMode::full) {
        selected.resize(cases.size());
        std::iota(selected.begin(), selected.end(), 0);
    } else {
        selected = detail::sample_case_indices(cases.size(), focus_index, config.fixed_count,
                                               config.seed);
    }

    std::vector<FactTriple> base;
    std::vector<EditOperation> edits;
    EditMemory memory;
    for (std::size_t index : selected) {
        const MultiHopCase& item = cases[index];
        if (config.full_includes_originals) {
            base.insert(base.end(), item.original_triples.begin(), item.original_triples.end());
        }
        std::vector<EditOperation> item_edits = detail::case_edits(item);
        edits.insert(edits.end(), item_edits.begin(), item_edits.end());
        for (const EditOperation& rewrite : item.rewrites) memory.add(rewrite.as_triple());
    }
    return {apply_edits(build_structure(base), edits), std::move(memory)};
}

inline bool answer_is_correct(const std::string& answer, const MultiHopCase& item) {
    std::string normalized = normalize_label(answer);
    if (normalized.empty()) return false;
    if (normalized == normalize_label(item.gold_new_answer)) return true;
    for (const std::string& alias : item.answer_aliases) {
        if (normalized == normalize_label(alias)) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Case execution
// ---------------------------------------------------------------------------

struct CaseResult {
    std::string case_id;
    std::size_t hop_count = 0;
    bool correct = false;
    std::string predicted;
    std::optional<FailureReason> failure;
    double latency_seconds = 0.0;
    std::size_t oracle_calls = 0;
    std::vector<PipelineAnswer> attempts;       // struedit runs
    std::vector<std::string> baseline_replies;  // ice runs
};

namespace detail {

inline void score_attempt(CaseResult& result, bool ok, const std::string& predicted,
                          std::optional<FailureReason> failure, bool& stop,
                          bool require_all, bool last_question) {
    if (require_all) {
        if (!ok && !result.failure) result.failure = failure;
        if (!ok) result.correct = false;
        if (last_question && result.correct) result.predicted = predicted;
        if (!ok) {
            result.predicted = predicted;
            stop = true;
        }
    } else if (ok) {
        result.correct = true;
        result.predicted = predicted;
        result.failure.reset();
        stop = true;
    } else {
        result.predicted = predicted;
        result.failure = failure;
    }
}

}  // namespace detail

inline CaseResult run_case(const std::vector<MultiHopCase>& cases, std::size_t focus_index,
                           const HarnessConfig& config, Oracle& oracle,
                           const PromptTemplateSet& templates, Clock& clock) {
    const MultiHopCase& focus = cases[focus_index];
    CaseResult result;
    result.case_id = focus.case_id;
    result.hop_count = focus.hop_count;
    result.correct = config.require_all_paraphrases;  // all-mode starts optimistic

    try {
        auto [structure, memory] = build_edit_memory(cases, focus_index, config);
        bool stop = false;
        for (std::size_t q = 0; q < focus.questions.size() && !stop; ++q) {
            const std::string& question = focus.questions[q];
            bool last = q + 1 == focus.questions.size();
            if (config.system == SystemKind::struedit) {
                PipelineAnswer answer = answer_question(question, structure, oracle, templates,
                                                        config.pipeline, clock);
                result.latency_seconds += answer.total_seconds();
                result.oracle_calls += answer.oracle_calls();
                bool ok = answer.answered() && answer_is_correct(answer.answer.display, focus);
                detail::score_attempt(result, ok, answer.answer.display, answer.failure, stop,
                                      config.require_all_paraphrases, last);
                result.attempts.push_back(std::move(answer));
            } else {
                TranscriptRecorder recorder(oracle);
                std::string reply;
                std::optional<FailureReason> failure;
                double started = clock.now();
                try {
                    reply = baseline_answer(question, memory, recorder, config.retrieval_k);
                } catch (const Error& error) {
                    failure = detail::surface_failure(error.reason());
                }
                result.latency_seconds += clock.now() - started;
                result.oracle_calls += recorder.call_count();
                bool ok = !failure && answer_is_correct(reply, focus);
                detail::score_attempt(result, ok, reply, failure, stop,
                                      config.require_all_paraphrases, last);
                result.baseline_replies.push_back(std::move(reply));
            }
        }
    } catch (const Error& error) {
        result.correct = false;
        result.failure = detail::surface_failure(error.reason());
    } catch (const std::exception&) {
        result.correct = false;
        result.failure = FailureReason::oracle_unavailable;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

struct LatencyStats {
    double mean = 0.0;
    double median = 0.0;
    double p95 = 0.0;
};

inline LatencyStats latency_stats(std::vector<double> values) {
    LatencyStats stats;
    if (values.empty()) return stats;
    std::sort(values.begin(), values.end());
    stats.mean = std::accumulate(values.begin(), values.end(), 0.0) /
                 static_cast<double>(values.size());
    std::size_t n = values.size();
    stats.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    std::size_t rank = (n * 95 + 99) / 100;  // ceil(0.95 n), nearest-rank
    stats.p95 = values[rank - 1];
    return stats;
}

struct EvaluationReport {
    std::size_t case_count = 0;
    double overall_accuracy = 0.0;
    std::map<std::size_t, double> per_hop_accuracy;
    std::map<std::string, std::size_t> error_counts;
    LatencyStats latency;
    std::map<std::size_t, LatencyStats> latency_per_hop;
    double oracle_calls_mean = 0.0;
    std::vector<CaseResult> case_results;
};

using ClockFactory = std::function<std::unique_ptr<Clock>()>;

inline EvaluationReport run_evaluation(const std::vector<MultiHopCase>& cases,
                                       const HarnessConfig& config, Oracle& oracle,
                                       const PromptTemplateSet& templates,
                                       const ClockFactory& clock_factory = {}) {
    config.validate();
    if (cases.empty()) {
        throw Error(FailureReason::dataset_unreadable, "no cases to evaluate");
    }

    std::vector<CaseResult> results(cases.size());
    auto run_one = [&](std::size_t index) {
        std::unique_ptr<Clock> owned = clock_factory ? clock_factory() : nullptr;
        Clock& clock = owned ? *owned : steady_clock();
        results[index] = run_case(cases, index, config, oracle, templates, clock);
    };

    std::size_t workers = std::min<std::size_t>(config.concurrency_limit, cases.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < cases.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    std::size_t index = next.fetch_add(1);
                    if (index >= cases.size()) break;
                    run_one(index);
                }
            });
        }
        for (std::thread& worker : pool) worker.join();
    }

    EvaluationReport report;
    report.case_count = results.size();
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> hop_tallies;  // correct, total
    std::map<std::size_t, std::vector<double>> hop_latencies;
    std::vector<double> latencies;
    double total_calls = 0.0;
    std::size_t total_correct = 0;
    for (const CaseResult& result : results) {
        auto& [correct, total] = hop_tallies[result.hop_count];
        total += 1;
        if (result.correct) {
            correct += 1;
            total_correct += 1;
            report.error_counts["correct"] += 1;
        } else if (result.failure) {
            report.error_counts[to_string(*result.failure)] += 1;
        } else {
            report.error_counts["wrong_answer"] += 1;
        }
        latencies.push_back(result.latency_seconds);
        hop_latencies[result.hop_count].push_back(result.latency_seconds);
        total_calls += static_cast<double>(result.oracle_calls);
    }
    report.overall_accuracy =
        static_cast<double>(total_correct) / static_cast<double>(results.size());
    for (const auto& [hops, tally] : hop_tallies) {
        report.per_hop_accuracy[hops] =
            static_cast<double>(tally.first) / static_cast<double>(tally.second);
    }
    report.latency = latency_stats(latencies);
    for (auto& [hops, values] : hop_latencies) {
        report.latency_per_hop[hops] = latency_stats(std::move(values));
    }
    report.oracle_calls_mean = total_calls / static_cast<double>(results.size());
    report.case_results = std::move(results);
    return report;
}

// ---------------------------------------------------------------------------
// Report serialization (stable key order via sorted JSON objects)
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json stats_json(const LatencyStats& stats) {
    return {{"mean", stats.mean}, {"median", stats.median}, {"p95", stats.p95}};
}

}  // namespace detail

inline nlohmann::json harness_config_json(const HarnessConfig& config) {
    nlohmann::json out;
    out["system"] = to_string(config.system);
    out["memory"] = config.memory_label();
    out["full_includes_originals"] = config.full_includes_originals;
    out["require_all_paraphrases"] = config.require_all_paraphrases;
    out["concurrency"] = config.concurrency_limit;
    out["seed"] = config.seed;
    out["retrieval_k"] = config.retrieval_k;
    out["extraction"] =
        config.pipeline.extraction_mode == ExtractionMode::llm ? "llm" : "det";
    out["matcher"] = to_string(config.pipeline.matcher.strategy);
    out["top_k"] = config.pipeline.matcher.prefilter_top_k;
    out["fanout"] = to_string(config.pipeline.fanout_policy);
    out["max_hops"] = config.pipeline.max_hops;
    return out;
}

inline nlohmann::json report_to_json(const EvaluationReport& report,
                                     nlohmann::json config_echo) {
    nlohmann::json out;
    out["version"] = "report/1";
    out["config"] = std::move(config_echo);
    out["case_count"] = report.case_count;
    out["overall_accuracy"] = report.overall_accuracy;
    nlohmann::json per_hop = nlohmann::json::object();
    for (const auto& [hops, accuracy] : report.per_hop_accuracy) {
        per_hop[std::to_string(hops)] = accuracy;
    }
    out["per_hop_accuracy"] = std::move(per_hop);
    nlohmann::json errors = nlohmann::json::object();
    for (const auto& [reason, count] : report.error_counts) errors[reason] = count;
    out["error_counts"] = std::move(errors);
    out["latency_seconds"] = detail::stats_json(report.latency);
    nlohmann::json latency_hop = nlohmann::json::object();
    for (const auto& [hops, stats] : report.latency_per_hop) {
        latency_hop[std::to_string(hops)] = detail::stats_json(stats);
    }
    out["latency_per_hop"] = std::move(latency_hop);
    out["oracle_calls_mean"] = report.oracle_calls_mean;
    nlohmann::json case_rows = nlohmann::json::array();
    for (const CaseResult& result : report.case_results) {
        nlohmann::json row;
        row["case_id"] = result.case_id;
        row["hop_count"] = result.hop_count;
        row["correct"] = result.correct;
        row["predicted"] = result.predicted;
        row["failure"] = result.failure ? nlohmann::json(to_string(*result.failure))
                                        : nlohmann::json(nullptr);
        row["latency_seconds"] = result.latency_seconds;
        row["oracle_calls"] = result.oracle_calls;
        case_rows.push_back(std::move(row));
    }
    out["cases"] = std::move(case_rows);
    return out;
}

}  // namespace struedit
