#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace struedit {

namespace detail {

inline bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

inline bool is_punct(char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

}  // namespace detail

// Canonical key for entities and relations: lowercase, trim, collapse
// internal whitespace runs to a single space, strip surrounding punctuation.
// Bytes outside ASCII pass through untouched.
inline std::string normalize_label(std::string_view text) {
    std::string lowered;
    lowered.reserve(text.size());
    for (char c : text) {
        lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }

    // Collapse whitespace and trim.
    std::string collapsed;
    collapsed.reserve(lowered.size());
    bool pending_space = false;
    for (char c : lowered) {
        if (detail::is_space(c)) {
            pending_space = !collapsed.empty();
        } else {
            if (pending_space) collapsed.push_back(' ');
            pending_space = false;
            collapsed.push_back(c);
        }
    }

    // Strip punctuation from both ends, then re-trim any exposed spaces.
    std::size_t begin = 0;
    std::size_t end = collapsed.size();
    while (begin < end && (detail::is_punct(collapsed[begin]) || collapsed[begin] == ' ')) ++begin;
    while (end > begin && (detail::is_punct(collapsed[end - 1]) || collapsed[end - 1] == ' ')) --end;
    return collapsed.substr(begin, end - begin);
}

inline std::string trim(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && detail::is_space(text[begin])) ++begin;
    while (end > begin && detail::is_space(text[end - 1])) --end;
    return std::string(text.substr(begin, end - begin));
}

// Whitespace tokenization; callers normalize first when they need canonical tokens.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && detail::is_space(text[i])) ++i;
        std::size_t start = i;
        while (i < text.size() && !detail::is_space(text[i])) ++i;
        if (i > start) tokens.emplace_back(text.substr(start, i - start));
    }
    return tokens;
}

}  // namespace struedit
