#pragma once

// IKE-style in-context baseline: retrieve the lexically closest edited facts,
// prepend them to the question, ask the oracle once, return its text.

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "struedit/lexical.hpp"
#include "struedit/oracle.hpp"
#include "struedit/types.hpp"

namespace struedit {

struct EditMemory {
    std::vector<FactTriple> facts;
    std::vector<std::string> rendered;

    std::size_t size() const { return facts.size(); }
    bool empty() const { return facts.empty(); }

    void add(const FactTriple& fact) {
        facts.push_back(fact);
        rendered.push_back(render_statement(fact));
    }

    static std::string render_statement(const FactTriple& fact) {
        return fact.subject.display + " " + fact.relation.display + " " + fact.object.display +
               ".";
    }
};

inline std::vector<std::string> retrieve_edits(const std::string& question,
                                               const EditMemory& memory, std::size_t k) {
    if (k == 0 || memory.empty()) return {};
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(memory.size());
    for (std::size_t i = 0; i < memory.size(); ++i) {
        scored.emplace_back(lexical_score(question, memory.rendered[i]), i);
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    if (scored.size() > k) scored.resize(k);
    std::vector<std::string> statements;
    statements.reserve(scored.size());
    for (const auto& [score, index] : scored) statements.push_back(memory.rendered[index]);
    return statements;
}

inline constexpr const char* kBaselineSystemText =
    "Use the provided facts when they are relevant. Answer with the entity name only.";

// One oracle call per question, always.
inline std::string baseline_answer(const std::string& question, const EditMemory& memory,
                                   Oracle& oracle, std::size_t k = 4) {
    std::string prompt;
    for (const std::string& statement : retrieve_edits(question, memory, k)) {
        prompt += statement + "\n";
    }
    prompt += "Answer with the entity name only.\n";
    prompt += question;

    OracleRequest request;
    request.system_text = kBaselineSystemText;
    request.user_text = prompt;
    request.max_output_tokens = 64;
    OracleResponse response = oracle.complete(request);
    return trim(response.text);
}

}  // namespace struedit
