#pragma once

// End-to-end inference: chain generation -> skeleton extraction -> entity
// matching and hop-by-hop traversal of the edited structure. Failures are
// folded into the returned answer, never thrown across this boundary.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "struedit/chain.hpp"
#include "struedit/clock.hpp"
#include "struedit/error.hpp"
#include "struedit/knowledge_structure.hpp"
#include "struedit/matcher.hpp"
#include "struedit/oracle.hpp"
#include "struedit/types.hpp"

namespace struedit {

enum class FanoutPolicy { strict, lenient };

inline std::string to_string(FanoutPolicy policy) {
    return policy == FanoutPolicy::strict ? "strict" : "lenient";
}

struct PipelineConfig {
    ExtractionMode extraction_mode = ExtractionMode::llm;
    MatcherConfig matcher;
    FanoutPolicy fanout_policy = FanoutPolicy::strict;
    std::size_t max_hops = 6;

    void validate() const {
        if (max_hops < 1) throw std::invalid_argument("PipelineConfig: max_hops must be >= 1");
        matcher.validate();
    }
};

enum class AnswerStatus { answered, failed };

struct StageTrace {
    std::string stage;
    double duration_seconds = 0.0;
    std::size_t oracle_calls = 0;
};

struct PipelineAnswer {
    AnswerStatus status = AnswerStatus::failed;
    EntityId answer;
    ReasoningPath path;
    ReasoningSkeleton skeleton;
    ReasoningChain chain;
    std::vector<StageTrace> trace;
    std::optional<FailureReason> failure;
    std::string failure_detail;

    bool answered() const { return status == AnswerStatus::answered; }

    std::size_t oracle_calls() const {
        std::size_t total = 0;
        for (const StageTrace& stage : trace) total += stage.oracle_calls;
        return total;
    }

    double total_seconds() const {
        double total = 0.0;
        for (const StageTrace& stage : trace) total += stage.duration_seconds;
        return total;
    }
};

namespace detail {

// Collapse internal error causes onto the closed set a failed answer reports.
inline FailureReason surface_failure(FailureReason reason) {
    switch (reason) {
        case FailureReason::malformed_triple:
            return FailureReason::malformed_chain;
        case FailureReason::script_miss:
        case FailureReason::oracle_timeout:
        case FailureReason::unparseable_selection:
            return FailureReason::oracle_unavailable;
        default:
            return reason;
    }
}

}  // namespace detail

// Walk the structure along the skeleton: one entity match, then one relation
// selection per hop, greedy throughout.
inline std::pair<ReasoningPath, EntityId> infer_path(const ReasoningSkeleton& skeleton,
                                                     const KnowledgeStructure& structure,
                                                     Oracle* oracle,
                                                     const PipelineConfig& config) {
    config.validate();
    skeleton.validate();
    if (skeleton.hop_count() > config.max_hops) {
        throw Error(FailureReason::hop_limit_exceeded,
                    "skeleton has " + std::to_string(skeleton.hop_count()) + " hops, limit " +
                        std::to_string(config.max_hops));
    }

    EntityId current = match_entity(skeleton.source_entity, structure, oracle, config.matcher).chosen;
    ReasoningPath path;
    for (const RelationLabel& wanted : skeleton.relations) {
        RelationLabel relation =
            select_relation(wanted, current, structure, oracle, config.matcher).chosen;
        std::vector<EntityId> objects = structure.objects_of(current, relation);
        if (objects.empty()) {
            throw Error(FailureReason::dead_end,
                        "no object for (" + current.display + ", " + relation.display + ")");
        }
        if (objects.size() > 1 && config.fanout_policy == FanoutPolicy::strict) {
            throw Error(FailureReason::ambiguous_fanout,
                        "(" + current.display + ", " + relation.display + ") has " +
                            std::to_string(objects.size()) + " objects");
        }
        EntityId next = objects.front();  // sorted: smallest label under lenient fan-out
        path.hops.push_back(FactTriple{current, relation, next});
        current = next;
    }
    return {std::move(path), current};
}

namespace detail {

template <typename Body>
void run_stage(PipelineAnswer& answer, Clock& clock, const TranscriptRecorder* recorder,
               const char* name, Body&& body) {
    StageTrace stage;
    stage.stage = name;
    std::size_t calls_before = recorder ? recorder->call_count() : 0;
    double started = clock.now();
    try {
        body();
    } catch (...) {
        stage.duration_seconds = clock.now() - started;
        stage.oracle_calls = (recorder ? recorder->call_count() : 0) - calls_before;
        answer.trace.push_back(std::move(stage));
        throw;
    }
    stage.duration_seconds = clock.now() - started;
    stage.oracle_calls = (recorder ? recorder->call_count() : 0) - calls_before;
    answer.trace.push_back(std::move(stage));
}

inline void record_failure(PipelineAnswer& answer, FailureReason reason,
                           const std::string& detail) {
    answer.status = AnswerStatus::failed;
    answer.failure = surface_failure(reason);
    answer.failure_detail = detail;
}

}  // namespace detail

inline PipelineAnswer answer_question(const std::string& question,
                                      const KnowledgeStructure& structure, Oracle& oracle,
                                      const PromptTemplateSet& templates,
                                      const PipelineConfig& config,
                                      Clock& clock = steady_clock()) {
    config.validate();
    PipelineAnswer answer;
    TranscriptRecorder recorder(oracle);
    try {
        detail::run_stage(answer, clock, &recorder, "chain_generation", [&] {
            answer.chain = generate_chain(question, recorder, templates);
        });
        detail::run_stage(answer, clock, &recorder, "skeleton_extraction", [&] {
            answer.skeleton =
                extract_skeleton(answer.chain, &recorder, templates, config.extraction_mode);
        });
        detail::run_stage(answer, clock, &recorder, "path_inference", [&] {
            auto [path, terminal] = infer_path(answer.skeleton, structure, &recorder, config);
            answer.path = std::move(path);
            answer.answer = terminal;
        });
        answer.status = AnswerStatus::answered;
    } catch (const Error& error) {
        detail::record_failure(answer, error.reason(), error.what());
    } catch (const std::exception& error) {
        detail::record_failure(answer, FailureReason::oracle_unavailable, error.what());
    }
    return answer;
}

// The structural-editing task mode: the skeleton is given, so no chain or
// extraction stage runs.
inline PipelineAnswer answer_from_skeleton(const ReasoningSkeleton& skeleton,
                                           const KnowledgeStructure& structure, Oracle* oracle,
                                           const PipelineConfig& config,
                                           Clock& clock = steady_clock()) {
    config.validate();
    PipelineAnswer answer;
    answer.skeleton = skeleton;
    std::optional<TranscriptRecorder> recorder;
    if (oracle != nullptr) recorder.emplace(*oracle);
    try {
        detail::run_stage(answer, clock, recorder ? &*recorder : nullptr, "path_inference", [&] {
            auto [path, terminal] =
                infer_path(skeleton, structure, recorder ? &*recorder : nullptr, config);
            answer.path = std::move(path);
            answer.answer = terminal;
        });
        answer.status = AnswerStatus::answered;
    } catch (const Error& error) {
        detail::record_failure(answer, error.reason(), error.what());
    } catch (const std::exception& error) {
        detail::record_failure(answer, FailureReason::oracle_unavailable, error.what());
    }
    return answer;
}

}  // namespace struedit
