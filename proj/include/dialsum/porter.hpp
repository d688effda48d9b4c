#pragma once

#include <string>
#include <string_view>

// Porter stemming algorithm (M.F. Porter, 1980), operating on lowercase
// ASCII words. Words of length <= 2 are returned unchanged.

namespace dialsum {
namespace porter_detail {

inline bool is_consonant(std::string_view w, size_t i) {
    char c = w[i];
    switch (c) {
        case 'a': case 'e': case 'i': case 'o': case 'u':
            return false;
        case 'y':
            return i == 0 ? true : !is_consonant(w, i - 1);
        default:
            return true;
    }
}

// Number of VC sequences in [C](VC)^m[V].
inline int measure(std::string_view w) {
    int m = 0;
    size_t i = 0;
    size_t n = w.size();
    while (i < n && is_consonant(w, i)) ++i;
    while (i < n) {
        while (i < n && !is_consonant(w, i)) ++i;
        if (i >= n) break;
        ++m;
        while (i < n && is_consonant(w, i)) ++i;
    }
    return m;
}

inline bool contains_vowel(std::string_view w) {
    for (size_t i = 0; i < w.size(); ++i)
        if (!is_consonant(w, i)) return true;
    return false;
}

inline bool ends_double_consonant(std::string_view w) {
    size_t n = w.size();
    return n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1);
}

// *o: stem ends cvc where the final c is not w, x or y.
inline bool ends_cvc(std::string_view w) {
    size_t n = w.size();
    if (n < 3) return false;
    if (!is_consonant(w, n - 3) || is_consonant(w, n - 2) || !is_consonant(w, n - 1)) return false;
    char c = w[n - 1];
    return c != 'w' && c != 'x' && c != 'y';
}

inline bool ends_with(std::string_view w, std::string_view suffix) {
    return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

struct Rule {
    std::string_view suffix;
    std::string_view replacement;
};

// Applies the first matching rule whose stem has measure > min_m.
inline bool replace_if(std::string& w, std::string_view suffix, std::string_view repl, int min_m) {
    if (!ends_with(w, suffix)) return false;
    std::string_view stem = std::string_view(w).substr(0, w.size() - suffix.size());
    if (measure(stem) <= min_m) return true;  // matched, but condition failed: stop rule scan
    w.assign(stem);
    w.append(repl);
    return true;
}

}  // namespace porter_detail

inline std::string porter_stem(std::string_view word) {
    using namespace porter_detail;
    if (word.size() <= 2) return std::string(word);
    std::string w(word);

    // Step 1a
    if (ends_with(w, "sses")) w.resize(w.size() - 2);
    else if (ends_with(w, "ies")) w.resize(w.size() - 2);
    else if (!ends_with(w, "ss") && ends_with(w, "s")) w.resize(w.size() - 1);

    // Step 1b
    bool cleanup = false;
    if (ends_with(w, "eed")) {
        if (measure(std::string_view(w).substr(0, w.size() - 3)) > 0) w.resize(w.size() - 1);
    } else if (ends_with(w, "ed") && contains_vowel(std::string_view(w).substr(0, w.size() - 2))) {
        w.resize(w.size() - 2);
        cleanup = true;
    } else if (ends_with(w, "ing") && contains_vowel(std::string_view(w).substr(0, w.size() - 3))) {
        w.resize(w.size() - 3);
        cleanup = true;
    }
    if (cleanup) {
        if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
            w += 'e';
        } else if (ends_double_consonant(w) && !ends_with(w, "l") && !ends_with(w, "s") &&
                   !ends_with(w, "z")) {
            w.resize(w.size() - 1);
        } else if (measure(w) == 1 && ends_cvc(w)) {
            w += 'e';
        }
    }

    // Step 1c
    if (ends_with(w, "y") && contains_vowel(std::string_view(w).substr(0, w.size() - 1)))
        w.back() = 'i';

    // Step 2 (m > 0)
    static constexpr Rule step2[] = {
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"}, {"anci", "ance"},
        {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},   {"entli", "ent"},
        {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
    };
    for (const auto& r : step2)
        if (replace_if(w, r.suffix, r.replacement, 0)) break;

    // Step 3 (m > 0)
    static constexpr Rule step3[] = {
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"},  {"ful", ""},   {"ness", ""},
    };
    for (const auto& r : step3)
        if (replace_if(w, r.suffix, r.replacement, 0)) break;

    // Step 4 (m > 1); "ion" additionally requires the stem to end in s or t.
    static constexpr std::string_view step4[] = {
        "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
        "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
    };
    for (std::string_view suffix : step4) {
        if (!ends_with(w, suffix)) continue;
        std::string_view stem = std::string_view(w).substr(0, w.size() - suffix.size());
        if (suffix == "ion" && !(ends_with(stem, "s") || ends_with(stem, "t"))) continue;
        if (measure(stem) > 1) w.resize(stem.size());
        break;
    }

    // Step 5a
    if (ends_with(w, "e")) {
        std::string_view stem = std::string_view(w).substr(0, w.size() - 1);
        int m = measure(stem);
        if (m > 1 || (m == 1 && !ends_cvc(stem))) w.resize(w.size() - 1);
    }

    // Step 5b
    if (measure(w) > 1 && ends_double_consonant(w) && ends_with(w, "l")) w.resize(w.size() - 1);

    return w;
}

}  // namespace dialsum
