#pragma once

// Reasoning-chain generation and skeleton extraction. The oracle is prompted
// to emit one `(subject ; relation ; object)` line per hop; the skeleton
// keeps only the source entity and the relation sequence, discarding every
// other entity in the chain.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "struedit/error.hpp"
#include "struedit/oracle.hpp"
#include "struedit/types.hpp"

namespace struedit {

struct ReasoningChain {
    std::vector<FactTriple> steps;
    std::string raw_text;
    // Hop indices i >= 1 where steps[i].subject != steps[i-1].object. Recorded,
    // not fatal: only the relation sequence survives extraction.
    std::vector<std::size_t> linkage_violations;
};

struct ReasoningSkeleton {
    EntityId source_entity;
    std::vector<RelationLabel> relations;

    std::size_t hop_count() const { return relations.size(); }

    void validate() const {
        if (source_entity.empty()) {
            throw Error(FailureReason::malformed_skeleton, "skeleton has empty source entity");
        }
        if (relations.empty()) {
            throw Error(FailureReason::malformed_skeleton, "skeleton has no relations");
        }
        for (const RelationLabel& relation : relations) {
            if (relation.empty()) {
                throw Error(FailureReason::malformed_skeleton, "skeleton has an empty relation");
            }
        }
    }
};

enum class ExtractionMode { llm, deterministic };

struct PromptTemplateSet {
    std::string chain_generation_system;
    std::vector<std::pair<std::string, std::string>> chain_generation_demos;  // question -> chain
    std::string extraction_system;
    std::vector<std::pair<std::string, std::string>> extraction_demos;  // chain -> skeleton

    void validate() const {
        if (chain_generation_demos.empty() || extraction_demos.empty()) {
            throw std::invalid_argument("PromptTemplateSet: at least one demo per template");
        }
    }

    static PromptTemplateSet defaults();
};

inline constexpr const char* kChainFormatInstruction =
    "Answer ONLY with lines of the form (subject ; relation ; object).";
inline constexpr const char* kSkeletonFormatInstruction =
    "Answer ONLY with two lines: entity: <source entity> and "
    "relations: <r1> -> <r2> -> ... -> <rh>.";

// ---------------------------------------------------------------------------
// Parsing and rendering
// ---------------------------------------------------------------------------

// Each line matching `(<s> ; <r> ; <o>)` — flexible interior whitespace —
// becomes a triple, in line order; everything else is ignored.
inline std::vector<FactTriple> parse_chain_text(const std::string& raw) {
    std::vector<FactTriple> steps;
    std::istringstream lines(raw);
    std::string line;
    while (std::getline(lines, line)) {
        std::string stripped = trim(line);
        if (stripped.size() < 2 || stripped.front() != '(' || stripped.back() != ')') continue;
        std::string interior = stripped.substr(1, stripped.size() - 2);
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t semi = interior.find(';', start);
            if (semi == std::string::npos) {
                fields.push_back(interior.substr(start));
                break;
            }
            fields.push_back(interior.substr(start, semi - start));
            start = semi + 1;
        }
        if (fields.size() != 3) continue;
        std::string subject = trim(fields[0]);
        std::string relation = trim(fields[1]);
        std::string object = trim(fields[2]);
        if (normalize_label(subject).empty() || normalize_label(relation).empty() ||
            normalize_label(object).empty()) {
            continue;
        }
        steps.push_back(FactTriple::from(subject, relation, object));
    }
    if (steps.empty()) {
        throw Error(FailureReason::malformed_chain, "no parsable (s ; r ; o) line in reply");
    }
    return steps;
}

inline std::string render_chain_text(const std::vector<FactTriple>& steps) {
    std::string out;
    for (const FactTriple& step : steps) {
        out += "(" + step.subject.display + " ; " + step.relation.display + " ; " +
               step.object.display + ")\n";
    }
    if (!out.empty()) out.pop_back();
    return out;
}

// Expects an `entity: <e0>` line and a `relations: <r1> -> ... -> <rh>` line.
inline ReasoningSkeleton parse_skeleton_text(const std::string& raw) {
    std::optional<std::string> entity_text;
    std::optional<std::string> relations_text;
    std::istringstream lines(raw);
    std::string line;
    while (std::getline(lines, line)) {
        std::string stripped = trim(line);
        if (!entity_text && stripped.rfind("entity:", 0) == 0) {
            entity_text = trim(stripped.substr(7));
        } else if (!relations_text && stripped.rfind("relations:", 0) == 0) {
            relations_text = trim(stripped.substr(10));
        }
    }
    if (!entity_text || entity_text->empty()) {
        throw Error(FailureReason::malformed_skeleton, "missing entity line");
    }
    if (!relations_text || relations_text->empty()) {
        throw Error(FailureReason::malformed_skeleton, "missing relations line");
    }

    ReasoningSkeleton skeleton;
    skeleton.source_entity = EntityId::from(*entity_text);
    std::size_t start = 0;
    const std::string& text = *relations_text;
    while (true) {
        std::size_t arrow = text.find("->", start);
        std::string piece =
            arrow == std::string::npos ? text.substr(start) : text.substr(start, arrow - start);
        std::string relation = trim(piece);
        if (normalize_label(relation).empty()) {
            throw Error(FailureReason::malformed_skeleton, "empty relation in: " + text);
        }
        skeleton.relations.push_back(RelationLabel::from(relation));
        if (arrow == std::string::npos) break;
        start = arrow + 2;
    }
    skeleton.validate();
    return skeleton;
}

inline std::string render_skeleton_text(const ReasoningSkeleton& skeleton) {
    std::string out = "entity: " + skeleton.source_entity.display + "\nrelations: ";
    for (std::size_t i = 0; i < skeleton.relations.size(); ++i) {
        if (i > 0) out += " -> ";
        out += skeleton.relations[i].display;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Oracle-backed operations
// ---------------------------------------------------------------------------

namespace detail {

inline std::string chain_user_prompt(const std::string& question,
                                     const PromptTemplateSet& templates) {
    std::string prompt;
    for (const auto& [demo_question, demo_chain] : templates.chain_generation_demos) {
        prompt += "Question: " + demo_question + "\n" + demo_chain + "\n\n";
    }
    prompt += "Question: " + question + "\n";
    return prompt;
}

inline std::string extraction_user_prompt(const std::string& chain_text,
                                          const PromptTemplateSet& templates) {
    std::string prompt;
    for (const auto& [demo_chain, demo_skeleton] : templates.extraction_demos) {
        prompt += "Chain:\n" + demo_chain + "\n" + demo_skeleton + "\n\n";
    }
    prompt += "Chain:\n" + chain_text + "\n";
    return prompt;
}

inline std::vector<std::size_t> find_linkage_violations(const std::vector<FactTriple>& steps) {
    std::vector<std::size_t> violations;
    for (std::size_t i = 1; i < steps.size(); ++i) {
        if (!(steps[i].subject == steps[i - 1].object)) violations.push_back(i);
    }
    return violations;
}

}  // namespace detail

// Prompt the oracle for a multi-hop reasoning chain. One re-prompt with the
// literal format instruction before giving up.
inline ReasoningChain generate_chain(const std::string& question, Oracle& oracle,
                                     const PromptTemplateSet& templates) {
    if (question.empty()) throw std::invalid_argument("generate_chain: question is empty");
    templates.validate();

    OracleRequest request;
    request.system_text = templates.chain_generation_system;
    request.user_text = detail::chain_user_prompt(question, templates);
    request.max_output_tokens = 512;

    OracleResponse response = oracle.complete(request);
    ReasoningChain chain;
    chain.raw_text = response.text;
    try {
        chain.steps = parse_chain_text(response.text);
    } catch (const Error&) {
        request.user_text += std::string("\n") + kChainFormatInstruction + "\n";
        response = oracle.complete(request);
        chain.raw_text = response.text;
        chain.steps = parse_chain_text(response.text);  // second failure propagates
    }
    chain.linkage_violations = detail::find_linkage_violations(chain.steps);
    return chain;
}

// Project the skeleton out of a chain. Deterministic mode is a pure
// projection (no oracle call); llm mode re-asks the oracle and parses its
// restatement. Both discard every intermediate and terminal entity.
inline ReasoningSkeleton extract_skeleton(const ReasoningChain& chain, Oracle* oracle,
                                          const PromptTemplateSet& templates,
                                          ExtractionMode mode) {
    if (chain.steps.empty()) {
        throw Error(FailureReason::malformed_chain, "cannot extract from an empty chain");
    }
    if (mode == ExtractionMode::deterministic) {
        ReasoningSkeleton skeleton;
        skeleton.source_entity = chain.steps.front().subject;
        for (const FactTriple& step : chain.steps) skeleton.relations.push_back(step.relation);
        skeleton.validate();
        return skeleton;
    }

    if (oracle == nullptr) {
        throw Error(FailureReason::oracle_unavailable, "llm extraction requires an oracle");
    }
    templates.validate();
    OracleRequest request;
    request.system_text = templates.extraction_system;
    request.user_text = detail::extraction_user_prompt(render_chain_text(chain.steps), templates);
    request.max_output_tokens = 256;

    OracleResponse response = oracle->complete(request);
    try {
        return parse_skeleton_text(response.text);
    } catch (const Error&) {
        request.user_text += std::string("\n") + kSkeletonFormatInstruction + "\n";
        response = oracle->complete(request);
        return parse_skeleton_text(response.text);  // second failure propagates
    }
}

// ---------------------------------------------------------------------------
// Template fixtures
// ---------------------------------------------------------------------------

inline PromptTemplateSet PromptTemplateSet::defaults() {
    PromptTemplateSet templates;
    templates.chain_generation_system =
        "You decompose multi-hop questions into chains of fact triples, one per hop, "
        "in reasoning order. Answer ONLY with lines of the form (subject ; relation ; object).";
    templates.chain_generation_demos = {
        {"Who is the spouse of the creator of Riverdale Gazette?",
         "(Riverdale Gazette ; created by ; Martin Cole)\n"
         "(Martin Cole ; spouse ; Dana Cole)"},
        {"In which country is the headquarters of the company that owns Photon Mail?",
         "(Photon Mail ; owned by ; Helios Software)\n"
         "(Helios Software ; headquarters location ; Zurich)\n"
         "(Zurich ; country ; Switzerland)"},
        {"Who leads the party of the mayor of the city where Aurora Bridge is located?",
         "(Aurora Bridge ; located in ; Northgate)\n"
         "(Northgate ; mayor ; Iris Vale)\n"
         "(Iris Vale ; member of ; Unity Party)\n"
         "(Unity Party ; led by ; Omar Haddad)"},
    };
    templates.extraction_system =
        "You extract the source entity and the ordered relation sequence from a chain of "
        "fact triples. Answer ONLY with two lines: entity: <source entity> and "
        "relations: <r1> -> <r2> -> ... -> <rh>.";
    templates.extraction_demos = {
        {"(Riverdale Gazette ; created by ; Martin Cole)\n"
         "(Martin Cole ; spouse ; Dana Cole)",
         "entity: Riverdale Gazette\nrelations: created by -> spouse"},
        {"(Photon Mail ; owned by ; Helios Software)\n"
         "(Helios Software ; headquarters location ; Zurich)\n"
         "(Zurich ; country ; Switzerland)",
         "entity: Photon Mail\nrelations: owned by -> headquarters location -> country"},
        {"(Aurora Bridge ; located in ; Northgate)\n"
         "(Northgate ; mayor ; Iris Vale)\n"
         "(Iris Vale ; member of ; Unity Party)\n"
         "(Unity Party ; led by ; Omar Haddad)",
         "entity: Aurora Bridge\nrelations: located in -> mayor -> member of -> led by"},
    };
    return templates;
}

namespace detail {

// File layout: system text block, then (input, output) demo block pairs, all
// separated by `---` lines.
inline std::vector<std::string> split_template_blocks(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(FailureReason::dataset_unreadable,
                    "cannot open prompt template " + path.string());
    }
    std::vector<std::string> blocks(1);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line) == "---") {
            blocks.emplace_back();
        } else {
            if (!blocks.back().empty()) blocks.back() += "\n";
            blocks.back() += line;
        }
    }
    for (std::string& block : blocks) block = trim(block);
    return blocks;
}

inline void load_template_file(const std::filesystem::path& path, std::string& system_text,
                               std::vector<std::pair<std::string, std::string>>& demos) {
    std::vector<std::string> blocks = split_template_blocks(path);
    if (blocks.size() < 3 || blocks.size() % 2 == 0) {
        throw Error(FailureReason::dataset_unreadable,
                    path.string() + ": expected a system block plus demo block pairs");
    }
    system_text = blocks[0];
    demos.clear();
    for (std::size_t i = 1; i + 1 < blocks.size(); i += 2) {
        demos.emplace_back(blocks[i], blocks[i + 1]);
    }
}

}  // namespace detail

inline PromptTemplateSet load_prompt_templates(const std::filesystem::path& dir) {
    PromptTemplateSet templates;
    detail::load_template_file(dir / "chain_generation.txt", templates.chain_generation_system,
                               templates.chain_generation_demos);
    detail::load_template_file(dir / "skeleton_extraction.txt", templates.extraction_system,
                               templates.extraction_demos);
    templates.validate();
    return templates;
}

}  // namespace struedit
