#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "nbestslu/error.hpp"

namespace nbest {

enum class EditGranularity { token, character };

inline const char* to_string(EditGranularity g) {
    return g == EditGranularity::token ? "token" : "character";
}

inline EditGranularity granularity_from_string(const std::string& s) {
    if (s == "token") return EditGranularity::token;
    if (s == "character") return EditGranularity::character;
    throw Error(format_msg("unknown edit-distance granularity '", s,
                           "' (expected token or character)"));
}

inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string t;
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            if (!t.empty()) {
                tokens.push_back(t);
                t.clear();
            }
        } else {
            t += c;
        }
    }
    if (!t.empty()) tokens.push_back(t);
    return tokens;
}

// Levenshtein distance (unit-cost insert/delete/substitute), two-row DP.
template <typename Seq>
std::size_t levenshtein(const Seq& a, const Seq& b) {
    const std::size_t n = a.size(), m = b.size();
    if (n == 0) return m;
    if (m == 0) return n;
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

inline std::size_t edit_distance(const std::string& a, const std::string& b,
                                 EditGranularity granularity = EditGranularity::token) {
    if (granularity == EditGranularity::token) {
        return levenshtein(tokenize(a), tokenize(b));
    }
    return levenshtein(a, b);
}

} // namespace nbest
