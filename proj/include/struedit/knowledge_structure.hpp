#pragma once

// Indexed triple store over normalized entity/relation labels.
//
// - out_index: subject -> relation -> sorted, duplicate-free object list
// - entity_catalog: every entity (subject or object) exactly once, sorted
// - immutable after build; apply_edits returns a fresh structure
//
// Display forms are canonicalized per label (lexicographically smallest
// surface form wins) so that building from any permutation of the same
// triples yields an identical structure.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "struedit/error.hpp"
#include "struedit/types.hpp"

namespace struedit {

// A realized traversal: hops[i].subject == hops[i-1].object. The terminal
// object is the answer the path leads to.
struct ReasoningPath {
    std::vector<FactTriple> hops;

    const EntityId& terminal() const { return hops.back().object; }
    std::size_t length() const { return hops.size(); }

    friend bool operator==(const ReasoningPath& a, const ReasoningPath& b) {
        return a.hops == b.hops;
    }
};

class KnowledgeStructure {
public:
    KnowledgeStructure() = default;

    bool empty() const { return triples_.empty(); }
    std::size_t triple_count() const { return triples_.size(); }
    std::size_t entity_count() const { return catalog_.size(); }

    const std::vector<FactTriple>& triples() const { return triples_; }
    const std::vector<EntityId>& entity_catalog() const { return catalog_; }

    std::optional<EntityId> find_entity(std::string_view label) const {
        auto it = entity_by_label_.find(std::string(label));
        if (it == entity_by_label_.end()) return std::nullopt;
        return it->second;
    }

    bool contains_entity(const EntityId& entity) const {
        return entity_by_label_.count(entity.label) > 0;
    }

    // Distinct outgoing relations of `entity`, sorted by label.
    std::vector<RelationLabel> relations_of(const EntityId& entity) const {
        std::vector<RelationLabel> result;
        auto it = out_.find(entity.label);
        if (it == out_.end()) return result;
        result.reserve(it->second.size());
        for (const auto& [relation_label, objects] : it->second) {
            result.push_back(relation_by_label_.at(relation_label));
        }
        return result;
    }

    // Objects under (entity, relation), sorted by label, duplicate-free.
    std::vector<EntityId> objects_of(const EntityId& entity, const RelationLabel& relation) const {
        auto it = out_.find(entity.label);
        if (it == out_.end()) return {};
        auto jt = it->second.find(relation.label);
        if (jt == it->second.end()) return {};
        return jt->second;
    }

    friend bool operator==(const KnowledgeStructure& a, const KnowledgeStructure& b) {
        return a.triples_ == b.triples_;
    }

    friend KnowledgeStructure build_structure(const std::vector<FactTriple>& triples);

private:
    std::map<std::string, std::map<std::string, std::vector<EntityId>>> out_;
    std::vector<FactTriple> triples_;  // canonical, sorted
    std::vector<EntityId> catalog_;    // sorted by label
    std::map<std::string, EntityId> entity_by_label_;
    std::map<std::string, RelationLabel> relation_by_label_;
};

inline KnowledgeStructure build_structure(const std::vector<FactTriple>& triples) {
    // Canonical display per label: smallest surface form seen.
    std::map<std::string, std::string> entity_display;
    std::map<std::string, std::string> relation_display;
    auto note_entity = [&](const EntityId& e) {
        auto [it, inserted] = entity_display.emplace(e.label, e.display);
        if (!inserted && e.display < it->second) it->second = e.display;
    };
    auto note_relation = [&](const RelationLabel& r) {
        auto [it, inserted] = relation_display.emplace(r.label, r.display);
        if (!inserted && r.display < it->second) it->second = r.display;
    };

    std::set<std::tuple<std::string, std::string, std::string>> keys;
    for (const FactTriple& triple : triples) {
        triple.validate();
        note_entity(triple.subject);
        note_entity(triple.object);
        note_relation(triple.relation);
        keys.emplace(triple.subject.label, triple.relation.label, triple.object.label);
    }

    KnowledgeStructure structure;
    for (const auto& [label, display] : entity_display) {
        EntityId entity{label, display};
        structure.entity_by_label_.emplace(label, entity);
        structure.catalog_.push_back(std::move(entity));
    }
    for (const auto& [label, display] : relation_display) {
        structure.relation_by_label_.emplace(label, RelationLabel{label, display});
    }

    structure.triples_.reserve(keys.size());
    for (const auto& [subject_label, relation_label, object_label] : keys) {
        const EntityId& subject = structure.entity_by_label_.at(subject_label);
        const RelationLabel& relation = structure.relation_by_label_.at(relation_label);
        const EntityId& object = structure.entity_by_label_.at(object_label);
        structure.triples_.push_back(FactTriple{subject, relation, object});
        structure.out_[subject_label][relation_label].push_back(object);
    }
    // keys iterate sorted, so per-(s, r) object lists come out sorted and unique.
    return structure;
}

// Replace-object semantics: each edit removes every (subject, relation, *)
// triple, then inserts (subject, relation, new_object). Edits apply in list
// order; later edits on the same key win. The input structure is untouched.
inline KnowledgeStructure apply_edits(const KnowledgeStructure& structure,
                                      const std::vector<EditOperation>& edits) {
    for (const EditOperation& edit : edits) edit.validate();

    std::vector<FactTriple> working = structure.triples();
    for (const EditOperation& edit : edits) {
        std::erase_if(working, [&](const FactTriple& t) {
            return t.subject.label == edit.subject.label &&
                   t.relation.label == edit.relation.label;
        });
        working.push_back(edit.as_triple());
    }
    return build_structure(working);
}

namespace detail {

inline void enumerate_paths(const KnowledgeStructure& structure, const EntityId& current,
                            std::size_t remaining, ReasoningPath& prefix,
                            std::vector<ReasoningPath>& out) {
    if (remaining == 0) {
        out.push_back(prefix);
        return;
    }
    for (const RelationLabel& relation : structure.relations_of(current)) {
        for (const EntityId& object : structure.objects_of(current, relation)) {
            prefix.hops.push_back(FactTriple{current, relation, object});
            enumerate_paths(structure, object, remaining - 1, prefix, out);
            prefix.hops.pop_back();
        }
    }
}

}  // namespace detail

// Exhaustive enumeration of all length-`hops` paths from `source`, in
// lexicographic (relation, object) order per hop. Testing oracle for the
// inference pipeline; exponential in the worst case.
inline std::vector<ReasoningPath> brute_force_paths(const KnowledgeStructure& structure,
                                                    const EntityId& source, std::size_t hops) {
    if (hops < 1) throw std::invalid_argument("brute_force_paths: hops must be >= 1");
    std::vector<ReasoningPath> paths;
    if (!structure.contains_entity(source)) return paths;
    ReasoningPath prefix;
    detail::enumerate_paths(structure, *structure.find_entity(source.label), hops, prefix, paths);
    return paths;
}

// Flat-file format: one `subject<TAB>relation<TAB>object` record per line,
// UTF-8, `#` starts a comment line.
inline std::vector<FactTriple> load_triples_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(FailureReason::dataset_unreadable, "cannot open " + path.string());
    }
    std::vector<FactTriple> triples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        std::size_t first = line.find('\t');
        std::size_t second = first == std::string::npos ? std::string::npos
                                                        : line.find('\t', first + 1);
        if (first == std::string::npos || second == std::string::npos) {
            throw Error(FailureReason::malformed_triple,
                        path.string() + ":" + std::to_string(line_no) + ": expected 3 tab-separated fields");
        }
        triples.push_back(FactTriple::from(line.substr(0, first),
                                           line.substr(first + 1, second - first - 1),
                                           line.substr(second + 1)));
    }
    return triples;
}

inline void save_triples_file(const KnowledgeStructure& structure,
                              const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(FailureReason::dataset_unreadable, "cannot write " + path.string());
    }
    for (const FactTriple& t : structure.triples()) {
        out << t.subject.display << '\t' << t.relation.display << '\t' << t.object.display << '\n';
    }
}

}  // namespace struedit
