#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

#include "struedit/error.hpp"
#include "struedit/text.hpp"

namespace struedit {

// Entity identity lives entirely in the normalized label; display keeps the
// surface form for prompts and reports.
struct EntityId {
    std::string label;
    std::string display;

    static EntityId from(std::string_view display_text) {
        return EntityId{normalize_label(display_text), std::string(display_text)};
    }

    bool empty() const { return label.empty(); }

    friend bool operator==(const EntityId& a, const EntityId& b) { return a.label == b.label; }
    friend std::strong_ordering operator<=>(const EntityId& a, const EntityId& b) {
        return a.label <=> b.label;
    }
};

struct RelationLabel {
    std::string label;
    std::string display;

    static RelationLabel from(std::string_view display_text) {
        return RelationLabel{normalize_label(display_text), std::string(display_text)};
    }

    bool empty() const { return label.empty(); }

    friend bool operator==(const RelationLabel& a, const RelationLabel& b) {
        return a.label == b.label;
    }
    friend std::strong_ordering operator<=>(const RelationLabel& a, const RelationLabel& b) {
        return a.label <=> b.label;
    }
};

struct FactTriple {
    EntityId subject;
    RelationLabel relation;
    EntityId object;

    // Checked construction from surface text; throws on fields that normalize
    // to nothing.
    static FactTriple from(std::string_view subject_text, std::string_view relation_text,
                           std::string_view object_text) {
        FactTriple triple{EntityId::from(subject_text), RelationLabel::from(relation_text),
                          EntityId::from(object_text)};
        triple.validate();
        return triple;
    }

    void validate() const {
        if (subject.empty() || relation.empty() || object.empty()) {
            throw Error(FailureReason::malformed_triple,
                        "empty field in (" + subject.display + " ; " + relation.display + " ; " +
                            object.display + ")");
        }
    }

    friend bool operator==(const FactTriple& a, const FactTriple& b) {
        return a.subject == b.subject && a.relation == b.relation && a.object == b.object;
    }
    friend std::strong_ordering operator<=>(const FactTriple& a, const FactTriple& b) {
        if (auto c = a.subject <=> b.subject; c != 0) return c;
        if (auto c = a.relation <=> b.relation; c != 0) return c;
        return a.object <=> b.object;
    }
};

// Counterfactual edit: replace every object under (subject, relation) with
// new_object. old_object is informational (datasets carry it); replacement
// does not require it.
struct EditOperation {
    EntityId subject;
    RelationLabel relation;
    std::optional<EntityId> old_object;
    EntityId new_object;

    static EditOperation replace(std::string_view subject_text, std::string_view relation_text,
                                 std::string_view new_object_text) {
        EditOperation edit{EntityId::from(subject_text), RelationLabel::from(relation_text),
                           std::nullopt, EntityId::from(new_object_text)};
        edit.validate();
        return edit;
    }

    static EditOperation replace(std::string_view subject_text, std::string_view relation_text,
                                 std::string_view old_object_text,
                                 std::string_view new_object_text) {
        EditOperation edit{EntityId::from(subject_text), RelationLabel::from(relation_text),
                           EntityId::from(old_object_text), EntityId::from(new_object_text)};
        edit.validate();
        return edit;
    }

    void validate() const {
        if (subject.empty() || relation.empty() || new_object.empty()) {
            throw Error(FailureReason::malformed_triple,
                        "empty field in edit on (" + subject.display + " ; " + relation.display +
                            ")");
        }
        if (old_object && *old_object == new_object) {
            throw Error(FailureReason::malformed_triple,
                        "edit on (" + subject.display + " ; " + relation.display +
                            ") replaces an object with itself");
        }
    }

    FactTriple as_triple() const { return FactTriple{subject, relation, new_object}; }
};

}  // namespace struedit
