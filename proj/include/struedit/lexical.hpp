#pragma once

// String similarity for candidate pre-filtering, selection fallback, and the
// baseline's retrieval: token Jaccard blended with character-trigram Dice,
// both computed over normalized text. Deterministic surrogate for the LLM
// candidate queries.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "struedit/text.hpp"

namespace struedit {

namespace detail {

inline std::set<std::string> token_set(const std::string& normalized) {
    std::set<std::string> tokens;
    for (std::string& token : tokenize(normalized)) tokens.insert(std::move(token));
    return tokens;
}

inline std::map<std::string, int> trigram_multiset(const std::string& normalized) {
    std::map<std::string, int> trigrams;
    if (normalized.size() >= 3) {
        for (std::size_t i = 0; i + 3 <= normalized.size(); ++i) {
            ++trigrams[normalized.substr(i, 3)];
        }
    }
    return trigrams;
}

inline double token_jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t intersection = 0;
    for (const std::string& token : a) intersection += b.count(token);
    std::size_t unions = a.size() + b.size() - intersection;
    return unions == 0 ? 0.0 : static_cast<double>(intersection) / static_cast<double>(unions);
}

inline double trigram_dice(const std::map<std::string, int>& a,
                           const std::map<std::string, int>& b) {
    std::size_t size_a = 0;
    std::size_t size_b = 0;
    for (const auto& [gram, count] : a) size_a += count;
    for (const auto& [gram, count] : b) size_b += count;
    if (size_a == 0 && size_b == 0) return 1.0;  // both shorter than a trigram
    if (size_a == 0 || size_b == 0) return 0.0;
    std::size_t overlap = 0;
    for (const auto& [gram, count] : a) {
        auto it = b.find(gram);
        if (it != b.end()) overlap += std::min(count, it->second);
    }
    return 2.0 * static_cast<double>(overlap) / static_cast<double>(size_a + size_b);
}

}  // namespace detail

// Weighted blend; weights are expected to sum to 1.
inline double lexical_score_weighted(std::string_view a, std::string_view b,
                                     double token_jaccard_weight, double trigram_dice_weight) {
    std::string na = normalize_label(a);
    std::string nb = normalize_label(b);
    if (na.empty() || nb.empty()) return 0.0;
    double jaccard = detail::token_jaccard(detail::token_set(na), detail::token_set(nb));
    double dice = detail::trigram_dice(detail::trigram_multiset(na), detail::trigram_multiset(nb));
    return token_jaccard_weight * jaccard + trigram_dice_weight * dice;
}

// 0.5 * Jaccard(token sets) + 0.5 * Dice(character trigram multisets) over
// normalized texts. Symmetric; 1.0 on identical non-empty strings; 0.0 when
// either side normalizes to nothing.
inline double lexical_score(std::string_view a, std::string_view b) {
    return lexical_score_weighted(a, b, 0.5, 0.5);
}

}  // namespace struedit
