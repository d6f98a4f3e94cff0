#pragma once

// MQuAKE-format ingestion. Maps the released JSON schema onto MultiHopCase;
// cases violating invariants are skipped with a reason, never fatal. Only
// file-level problems throw.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "struedit/error.hpp"
#include "struedit/types.hpp"

namespace struedit {

struct MultiHopCase {
    std::string case_id;
    std::vector<std::string> questions;
    std::string gold_new_answer;
    std::vector<std::string> answer_aliases;
    std::vector<FactTriple> original_triples;
    std::vector<FactTriple> edited_triples;  // the post-edit fact chain
    std::vector<EditOperation> rewrites;
    std::size_t hop_count = 0;
};

struct DatasetLoadResult {
    std::vector<MultiHopCase> cases;
    std::size_t skipped = 0;
    std::vector<std::string> skip_reasons;
};

namespace detail {

using nlohmann::json;

inline std::optional<std::string> id_to_text(const json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_integer()) return std::to_string(value.get<long long>());
    return std::nullopt;
}

inline std::optional<std::vector<FactTriple>> labeled_triples(const json& value,
                                                              std::string& why) {
    if (!value.is_array()) {
        why = "expected an array of [subject, relation, object] label triples";
        return std::nullopt;
    }
    std::vector<FactTriple> triples;
    for (const json& row : value) {
        if (!row.is_array() || row.size() != 3 || !row[0].is_string() || !row[1].is_string() ||
            !row[2].is_string()) {
            why = "triple row is not three strings";
            return std::nullopt;
        }
        try {
            triples.push_back(FactTriple::from(row[0].get<std::string>(),
                                               row[1].get<std::string>(),
                                               row[2].get<std::string>()));
        } catch (const Error& error) {
            why = error.what();
            return std::nullopt;
        }
    }
    return triples;
}

// The released files carry relation ids in `triples` and surface labels in
// `triples_labeled`, positionally aligned; zipping both lists recovers the
// id -> label map the rewrites need.
inline void collect_relation_labels(const json& ids, const json& labels,
                                    std::map<std::string, std::string>& out) {
    if (!ids.is_array() || !labels.is_array()) return;
    std::size_t n = std::min(ids.size(), labels.size());
    for (std::size_t i = 0; i < n; ++i) {
        const json& id_row = ids[i];
        const json& label_row = labels[i];
        if (!id_row.is_array() || id_row.size() != 3 || !id_row[1].is_string()) continue;
        if (!label_row.is_array() || label_row.size() != 3 || !label_row[1].is_string()) continue;
        out.emplace(id_row[1].get<std::string>(), label_row[1].get<std::string>());
    }
}

inline bool mentions_subject(const std::vector<FactTriple>& triples, const std::string& label) {
    for (const FactTriple& triple : triples) {
        if (triple.subject.label == label || triple.object.label == label) return true;
    }
    return false;
}

inline std::optional<MultiHopCase> parse_case(const json& entry, std::size_t index,
                                              std::string& why) {
    if (!entry.is_object()) {
        why = "entry is not an object";
        return std::nullopt;
    }
    MultiHopCase out;

    if (!entry.contains("case_id")) {
        why = "case_id missing";
        return std::nullopt;
    }
    std::optional<std::string> id = id_to_text(entry["case_id"]);
    if (!id) {
        why = "case_id is neither string nor integer";
        return std::nullopt;
    }
    out.case_id = *id;

    if (!entry.contains("questions") || !entry["questions"].is_array() ||
        entry["questions"].empty()) {
        why = "questions missing or empty";
        return std::nullopt;
    }
    for (const json& question : entry["questions"]) {
        if (!question.is_string() || question.get<std::string>().empty()) {
            why = "questions contains a non-string or empty entry";
            return std::nullopt;
        }
        out.questions.push_back(question.get<std::string>());
    }

    if (!entry.contains("new_answer") || !entry["new_answer"].is_string() ||
        entry["new_answer"].get<std::string>().empty()) {
        why = "new_answer missing or empty";
        return std::nullopt;
    }
    out.gold_new_answer = entry["new_answer"].get<std::string>();
    if (entry.contains("new_answer_alias") && entry["new_answer_alias"].is_array()) {
        for (const json& alias : entry["new_answer_alias"]) {
            if (alias.is_string()) out.answer_aliases.push_back(alias.get<std::string>());
        }
    }

    if (!entry.contains("orig") || !entry["orig"].is_object()) {
        why = "orig missing";
        return std::nullopt;
    }
    const json& orig = entry["orig"];
    if (orig.contains("triples_labeled")) {
        std::optional<std::vector<FactTriple>> triples =
            labeled_triples(orig["triples_labeled"], why);
        if (!triples) {
            why = "orig.triples_labeled: " + why;
            return std::nullopt;
        }
        out.original_triples = std::move(*triples);
    }
    if (!orig.contains("new_triples_labeled")) {
        why = "orig.new_triples_labeled missing";
        return std::nullopt;
    }
    std::optional<std::vector<FactTriple>> edited =
        labeled_triples(orig["new_triples_labeled"], why);
    if (!edited) {
        why = "orig.new_triples_labeled: " + why;
        return std::nullopt;
    }
    out.edited_triples = std::move(*edited);
    if (out.edited_triples.empty()) {
        why = "orig.new_triples_labeled is empty";
        return std::nullopt;
    }
    out.hop_count = out.edited_triples.size();

    std::map<std::string, std::string> relation_labels;
    if (orig.contains("triples")) {
        collect_relation_labels(orig["triples"], orig["triples_labeled"], relation_labels);
    }
    if (orig.contains("new_triples")) {
        collect_relation_labels(orig["new_triples"], orig["new_triples_labeled"],
                                relation_labels);
    }

    if (!entry.contains("requested_rewrite") || !entry["requested_rewrite"].is_array() ||
        entry["requested_rewrite"].empty()) {
        why = "requested_rewrite missing or empty";
        return std::nullopt;
    }
    for (const json& rewrite : entry["requested_rewrite"]) {
        if (!rewrite.is_object() || !rewrite.contains("subject") ||
            !rewrite["subject"].is_string()) {
            why = "requested_rewrite entry lacks a subject";
            return std::nullopt;
        }
        std::string subject = rewrite["subject"].get<std::string>();
        if (!rewrite.contains("relation_id") || !rewrite["relation_id"].is_string()) {
            why = "requested_rewrite entry lacks a relation_id";
            return std::nullopt;
        }
        std::string relation_id = rewrite["relation_id"].get<std::string>();
        auto label_it = relation_labels.find(relation_id);
        std::string relation = label_it != relation_labels.end() ? label_it->second : relation_id;

        if (!rewrite.contains("target_new") || !rewrite["target_new"].is_object() ||
            !rewrite["target_new"].contains("str") || !rewrite["target_new"]["str"].is_string()) {
            why = "requested_rewrite entry lacks target_new.str";
            return std::nullopt;
        }
        std::string target_new = rewrite["target_new"]["str"].get<std::string>();
        std::optional<std::string> target_true;
        if (rewrite.contains("target_true") && rewrite["target_true"].is_object() &&
            rewrite["target_true"].contains("str") && rewrite["target_true"]["str"].is_string()) {
            target_true = rewrite["target_true"]["str"].get<std::string>();
        }
        try {
            if (target_true && normalize_label(*target_true) != normalize_label(target_new)) {
                out.rewrites.push_back(
                    EditOperation::replace(subject, relation, *target_true, target_new));
            } else {
                out.rewrites.push_back(EditOperation::replace(subject, relation, target_new));
            }
        } catch (const Error& error) {
            why = std::string("requested_rewrite entry invalid: ") + error.what();
            return std::nullopt;
        }
        const std::string subject_label = normalize_label(subject);
        if (!mentions_subject(out.original_triples, subject_label) &&
            !mentions_subject(out.edited_triples, subject_label)) {
            why = "rewrite subject '" + subject + "' not among case triples";
            return std::nullopt;
        }
    }
    (void)index;
    return out;
}

}  // namespace detail

inline DatasetLoadResult load_mquake(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(FailureReason::dataset_unreadable, "cannot open dataset " + path.string());
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& error) {
        throw Error(FailureReason::dataset_unreadable,
                    path.string() + ": " + std::string(error.what()));
    }
    if (!doc.is_array()) {
        throw Error(FailureReason::schema_mismatch, "$: expected a JSON array of cases");
    }

    DatasetLoadResult result;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        std::string why;
        std::optional<MultiHopCase> parsed = detail::parse_case(doc[i], i, why);
        if (parsed) {
            result.cases.push_back(std::move(*parsed));
        } else {
            result.skipped += 1;
            result.skip_reasons.push_back("$[" + std::to_string(i) + "]: " + why);
        }
    }
    return result;
}

inline std::map<std::size_t, std::size_t> hop_histogram(const std::vector<MultiHopCase>& cases) {
    std::map<std::size_t, std::size_t> histogram;
    for (const MultiHopCase& item : cases) histogram[item.hop_count] += 1;
    return histogram;
}

}  // namespace struedit
