#pragma once

// Deterministic synthetic suites: multi-hop cases with disjoint name
// namespaces, matching scripted oracles, random functional structures, and
// distractor edits for robustness runs.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "struedit/chain.hpp"
#include "struedit/knowledge_structure.hpp"
#include "struedit/mquake.hpp"
#include "struedit/oracle.hpp"
#include "struedit/types.hpp"

namespace struedit {

struct SyntheticSuite {
    std::vector<MultiHopCase> cases;
    ScriptedOracle oracle;      // chain-generation + skeleton-extraction replies
    ScriptedOracle ice_oracle;  // direct question -> gold answer replies
};

// One case per hop count in `hop_counts`. The scripted chain reply is the
// ORIGINAL (pre-edit) chain, so traversal must rely on the edited structure,
// not the chain's stale entities.
inline SyntheticSuite make_synthetic_suite(const std::vector<std::size_t>& hop_counts,
                                           const std::string& prefix) {
    if (prefix.empty()) throw std::invalid_argument("make_synthetic_suite: empty prefix");
    SyntheticSuite suite;
    for (std::size_t i = 0; i < hop_counts.size(); ++i) {
        std::size_t hops = hop_counts[i];
        if (hops < 1) throw std::invalid_argument("make_synthetic_suite: hop count must be >= 1");
        const std::string base = prefix + "_c" + std::to_string(i);

        std::vector<std::string> old_nodes;   // e0..eh, the stale chain
        std::vector<std::string> new_nodes;   // f1..fh, the post-edit chain
        std::vector<std::string> relations;   // r1..rh
        for (std::size_t k = 0; k <= hops; ++k) {
            old_nodes.push_back(base + "_e" + std::to_string(k));
        }
        for (std::size_t k = 1; k <= hops; ++k) {
            new_nodes.push_back(base + "_f" + std::to_string(k));
            relations.push_back(base + "_r" + std::to_string(k));
        }

        MultiHopCase item;
        item.case_id = base;
        item.hop_count = hops;
        item.gold_new_answer = new_nodes.back();
        for (std::size_t k = 0; k < hops; ++k) {
            item.original_triples.push_back(
                FactTriple::from(old_nodes[k], relations[k], old_nodes[k + 1]));
        }
        item.edited_triples.push_back(FactTriple::from(old_nodes[0], relations[0], new_nodes[0]));
        for (std::size_t k = 1; k < hops; ++k) {
            item.edited_triples.push_back(
                FactTriple::from(new_nodes[k - 1], relations[k], new_nodes[k]));
        }
        item.rewrites.push_back(
            EditOperation::replace(old_nodes[0], relations[0], old_nodes[1], new_nodes[0]));

        std::string question = base + "_q: which entity do you reach from " + old_nodes[0];
        for (std::size_t k = 0; k < hops; ++k) {
            question += (k == 0 ? " via " : " then ") + relations[k];
        }
        question += "?";
        item.questions.push_back(question);

        std::string stale_chain = render_chain_text(item.original_triples);
        ReasoningSkeleton skeleton;
        skeleton.source_entity = EntityId::from(old_nodes[0]);
        for (const std::string& relation : relations) {
            skeleton.relations.push_back(RelationLabel::from(relation));
        }
        suite.oracle.add_rule(question, stale_chain);
        suite.oracle.add_rule(stale_chain, render_skeleton_text(skeleton));
        suite.ice_oracle.add_rule(question, item.gold_new_answer);

        suite.cases.push_back(std::move(item));
    }
    suite.ice_oracle.set_fallback("unknown");
    return suite;
}

// Self-contained edits in their own namespace; applying them can only add
// triples that share no entity or relation with any other namespace.
inline std::vector<EditOperation> make_distractor_edits(std::size_t count,
                                                        const std::string& prefix) {
    std::vector<EditOperation> edits;
    edits.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::string base = prefix + "_d" + std::to_string(i);
        edits.push_back(EditOperation::replace(base + "_s", base + "_r", base + "_o"));
    }
    return edits;
}

// Functional structure: every entity has 1..max_relations outgoing relations,
// each with exactly one object, so walks never dead-end and every relation
// sequence from a source determines at most one path.
inline KnowledgeStructure random_functional_structure(std::mt19937_64& rng,
                                                      std::size_t max_entities = 50,
                                                      std::size_t max_relations = 4) {
    if (max_entities < 2) throw std::invalid_argument("need at least two entities");
    if (max_relations < 1) throw std::invalid_argument("need at least one relation");
    std::size_t entity_count = 2 + static_cast<std::size_t>(rng() % (max_entities - 1));
    std::vector<std::string> entities;
    entities.reserve(entity_count);
    for (std::size_t i = 0; i < entity_count; ++i) {
        entities.push_back("node_" + std::to_string(i));
    }
    std::vector<std::string> relation_pool;
    for (std::size_t j = 0; j < max_relations; ++j) {
        relation_pool.push_back("rel_" + std::to_string(j));
    }

    std::vector<FactTriple> triples;
    std::vector<std::size_t> pick(max_relations);
    for (const std::string& subject : entities) {
        std::size_t arity = 1 + static_cast<std::size_t>(rng() % max_relations);
        for (std::size_t j = 0; j < max_relations; ++j) pick[j] = j;
        for (std::size_t j = max_relations; j > 1; --j) {
            std::swap(pick[j - 1], pick[rng() % j]);
        }
        for (std::size_t j = 0; j < arity; ++j) {
            const std::string& object = entities[rng() % entity_count];
            triples.push_back(FactTriple::from(subject, relation_pool[pick[j]], object));
        }
    }
    return build_structure(triples);
}

struct RandomWalk {
    ReasoningPath path;
    ReasoningSkeleton skeleton;
};

inline RandomWalk random_walk(const KnowledgeStructure& structure, std::mt19937_64& rng,
                              std::size_t hops) {
    if (hops < 1) throw std::invalid_argument("random_walk: hops must be >= 1");
    std::vector<EntityId> catalog = structure.entity_catalog();
    if (catalog.empty()) throw std::invalid_argument("random_walk: empty structure");

    RandomWalk walk;
    EntityId current = catalog[rng() % catalog.size()];
    walk.skeleton.source_entity = current;
    for (std::size_t h = 0; h < hops; ++h) {
        std::vector<RelationLabel> relations = structure.relations_of(current);
        if (relations.empty()) throw std::logic_error("random_walk: dead end in structure");
        RelationLabel relation = relations[rng() % relations.size()];
        EntityId next = structure.objects_of(current, relation).front();
        walk.path.hops.push_back(FactTriple{current, relation, next});
        walk.skeleton.relations.push_back(relation);
        current = next;
    }
    return walk;
}

}  // namespace struedit
