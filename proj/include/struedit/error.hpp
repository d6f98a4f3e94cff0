#pragma once

#include <stdexcept>
#include <string>

namespace struedit {

// Every failure a run can surface, across store, oracle, matcher, pipeline
// and dataset layers. The pipeline maps these onto its closed status set;
// the harness buckets them in evaluation reports.
enum class FailureReason {
    malformed_triple,
    malformed_chain,
    malformed_skeleton,
    entity_not_found,
    dead_end,
    ambiguous_fanout,
    hop_limit_exceeded,
    oracle_unavailable,
    oracle_timeout,
    script_miss,
    unparseable_selection,
    dataset_unreadable,
    schema_mismatch,
};

inline const char* to_string(FailureReason reason) {
    switch (reason) {
        case FailureReason::malformed_triple: return "malformed_triple";
        case FailureReason::malformed_chain: return "malformed_chain";
        case FailureReason::malformed_skeleton: return "malformed_skeleton";
        case FailureReason::entity_not_found: return "entity_not_found";
        case FailureReason::dead_end: return "dead_end";
        case FailureReason::ambiguous_fanout: return "ambiguous_fanout";
        case FailureReason::hop_limit_exceeded: return "hop_limit_exceeded";
        case FailureReason::oracle_unavailable: return "oracle_unavailable";
        case FailureReason::oracle_timeout: return "oracle_timeout";
        case FailureReason::script_miss: return "script_miss";
        case FailureReason::unparseable_selection: return "unparseable_selection";
        case FailureReason::dataset_unreadable: return "dataset_unreadable";
        case FailureReason::schema_mismatch: return "schema_mismatch";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(FailureReason reason, const std::string& message)
        : std::runtime_error(std::string(to_string(reason)) + ": " + message), reason_(reason) {}

    FailureReason reason() const { return reason_; }

private:
    FailureReason reason_;
};

}  // namespace struedit
