#pragma once

// Candidate matching against the knowledge structure: exact normalized match
// first, lexical ranking next, and an optional oracle round-trip over the
// rendered candidate query for the final pick.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "struedit/error.hpp"
#include "struedit/knowledge_structure.hpp"
#include "struedit/lexical.hpp"
#include "struedit/oracle.hpp"
#include "struedit/types.hpp"

namespace struedit {

enum class MatchStrategy { oracle, lexical };
enum class MatchMethod { exact, lexical, oracle };
enum class CandidateKind { entity, relation };

inline std::string to_string(MatchStrategy strategy) {
    return strategy == MatchStrategy::oracle ? "oracle" : "lexical";
}

struct MatcherConfig {
    MatchStrategy strategy = MatchStrategy::oracle;
    std::size_t prefilter_top_k = 20;
    double min_lexical_score = 0.0;
    double token_jaccard_weight = 0.5;
    double trigram_dice_weight = 0.5;

    void validate() const {
        if (prefilter_top_k == 0) {
            throw std::invalid_argument("MatcherConfig: prefilter_top_k must be positive");
        }
        if (min_lexical_score < 0.0 || min_lexical_score > 1.0) {
            throw std::invalid_argument("MatcherConfig: min_lexical_score outside [0,1]");
        }
        double sum = token_jaccard_weight + trigram_dice_weight;
        if (token_jaccard_weight < 0.0 || trigram_dice_weight < 0.0 ||
            sum < 1.0 - 1e-9 || sum > 1.0 + 1e-9) {
            throw std::invalid_argument("MatcherConfig: similarity weights must sum to 1");
        }
    }

    double score(const std::string& a, const std::string& b) const {
        return lexical_score_weighted(a, b, token_jaccard_weight, trigram_dice_weight);
    }
};

struct CandidateQuery {
    CandidateKind kind = CandidateKind::entity;
    std::string target;
    std::vector<std::string> features;  // rendered with 1-based indices

    void validate() const {
        if (features.empty()) throw std::invalid_argument("CandidateQuery: no candidates");
        if (target.empty()) throw std::invalid_argument("CandidateQuery: empty target");
    }
};

template <typename Id>
struct MatchResult {
    Id chosen;
    std::size_t chosen_index = 0;  // position among the candidates offered
    MatchMethod method = MatchMethod::exact;
    double score = 1.0;
};

// ---------------------------------------------------------------------------
// Candidate query rendering and reply parsing
// ---------------------------------------------------------------------------

inline std::string render_candidate_query(const CandidateQuery& query) {
    query.validate();
    std::string text;
    if (query.kind == CandidateKind::entity) {
        text = "Which candidate entity best matches the entity " + query.target + "?";
    } else {
        text = "Which candidate relation best matches the relation " + query.target + "?";
    }
    text += "\n";
    for (std::size_t i = 0; i < query.features.size(); ++i) {
        if (i > 0) text += ", ";
        text += "c_" + std::to_string(i + 1) + ": " + query.features[i];
    }
    return text;
}

// First in-range `c_<digits>` wins; otherwise the lexically closest candidate
// to the whole reply, lowest index on ties.
inline std::size_t parse_selection(const std::string& reply,
                                   const std::vector<std::string>& candidates) {
    if (candidates.empty()) throw std::invalid_argument("parse_selection: no candidates");
    if (trim(reply).empty()) {
        throw Error(FailureReason::unparseable_selection, "empty selection reply");
    }

    for (std::size_t pos = 0; (pos = reply.find("c_", pos)) != std::string::npos; pos += 2) {
        std::size_t digits_begin = pos + 2;
        std::size_t digits_end = digits_begin;
        while (digits_end < reply.size() &&
               std::isdigit(static_cast<unsigned char>(reply[digits_end]))) {
            ++digits_end;
        }
        std::size_t width = digits_end - digits_begin;
        if (width == 0 || width > 9) continue;
        unsigned long index = std::stoul(reply.substr(digits_begin, width));
        if (index >= 1 && index <= candidates.size()) return index - 1;
    }

    std::size_t best = 0;
    double best_score = -1.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        double score = lexical_score(reply, candidates[i]);
        if (score > best_score) {
            best_score = score;
            best = i;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Entity matching and relation selection
// ---------------------------------------------------------------------------

inline constexpr const char* kSelectionSystemText =
    "You pick the candidate that best matches the target. "
    "Reply with the index of your choice in the form c_<k>.";

namespace detail {

template <typename Id>
std::vector<std::pair<Id, double>> ranked_candidates(const Id& target,
                                                     const std::vector<Id>& catalog,
                                                     const MatcherConfig& config) {
    std::vector<std::pair<Id, double>> scored;
    scored.reserve(catalog.size());
    for (const Id& candidate : catalog) {
        scored.emplace_back(candidate, config.score(target.label, candidate.label));
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return scored;
}

template <typename Id>
MatchResult<Id> pick(const Id& target, std::vector<std::pair<Id, double>> scored,
                     CandidateKind kind, Oracle* oracle, const MatcherConfig& config) {
    if (config.strategy == MatchStrategy::lexical) {
        const auto& [best, score] = scored.front();
        if (kind == CandidateKind::entity && score < config.min_lexical_score) {
            throw Error(FailureReason::entity_not_found,
                        "no entity within lexical threshold of " + target.display);
        }
        return {best, 0, MatchMethod::lexical, score};
    }

    if (oracle == nullptr) {
        throw Error(FailureReason::oracle_unavailable,
                    "oracle matching strategy requires an oracle");
    }
    CandidateQuery query;
    query.kind = kind;
    query.target = target.display;
    for (const auto& [candidate, score] : scored) query.features.push_back(candidate.display);

    OracleRequest request;
    request.system_text = kSelectionSystemText;
    request.user_text = render_candidate_query(query);
    request.max_output_tokens = 64;
    OracleResponse response = oracle->complete(request);

    std::size_t index = parse_selection(response.text, query.features);
    return {scored[index].first, index, MatchMethod::oracle, 1.0};
}

}  // namespace detail

inline MatchResult<EntityId> match_entity(const EntityId& target,
                                          const KnowledgeStructure& structure, Oracle* oracle,
                                          const MatcherConfig& config) {
    config.validate();
    if (target.empty()) throw std::invalid_argument("match_entity: empty target");
    if (structure.empty()) {
        throw Error(FailureReason::entity_not_found, "structure is empty");
    }
    if (std::optional<EntityId> hit = structure.find_entity(target.label)) {
        return {*hit, 0, MatchMethod::exact, 1.0};
    }

    auto scored = detail::ranked_candidates(target, structure.entity_catalog(), config);
    if (scored.size() > config.prefilter_top_k) scored.resize(config.prefilter_top_k);
    return detail::pick(target, std::move(scored), CandidateKind::entity, oracle, config);
}

inline MatchResult<RelationLabel> select_relation(const RelationLabel& target,
                                                  const EntityId& current_entity,
                                                  const KnowledgeStructure& structure,
                                                  Oracle* oracle, const MatcherConfig& config) {
    config.validate();
    if (target.empty()) throw std::invalid_argument("select_relation: empty target");
    std::vector<RelationLabel> candidates = structure.relations_of(current_entity);
    if (candidates.empty()) {
        throw Error(FailureReason::dead_end,
                    "no outgoing relations from " + current_entity.display);
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].label == target.label) {
            return {candidates[i], i, MatchMethod::exact, 1.0};
        }
    }
    // Relation slates stay complete: they are already scoped to one entity.
    auto scored = detail::ranked_candidates(target, candidates, config);
    return detail::pick(target, std::move(scored), CandidateKind::relation, oracle, config);
}

}  // namespace struedit
