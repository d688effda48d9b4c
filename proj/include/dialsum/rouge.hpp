#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dialsum/io.hpp"
#include "dialsum/porter.hpp"

namespace dialsum {

struct NormalizeOpts {
    bool stem = true;
    bool lowercase = true;
};

// Lowercase, split on non-alphanumeric runs, Porter-stem each token.
inline std::vector<std::string> normalize(std::string_view text, NormalizeOpts opts = {}) {
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        tokens.push_back(opts.stem ? porter_stem(cur) : cur);
        cur.clear();
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur += opts.lowercase ? static_cast<char>(std::tolower(static_cast<unsigned char>(c)))
                                  : c;
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

struct Score {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

inline Score make_score(double p, double r) {
    Score s;
    s.precision = p;
    s.recall = r;
    s.f1 = (p + r > 0.0) ? 2.0 * p * r / (p + r) : 0.0;
    return s;
}

struct RougeScore {
    Score r1;
    Score r2;
    Score rl;
};

namespace rouge_detail {

// Interns tokens so n-grams can be keyed as packed integer pairs.
struct TokenIds {
    std::unordered_map<std::string_view, uint32_t> map;
    uint32_t id(std::string_view tok) {
        auto [it, inserted] = map.emplace(tok, static_cast<uint32_t>(map.size() + 1));
        return it->second;
    }
};

inline void count_ngrams(const std::vector<std::string>& tokens, int n, TokenIds& ids,
                         std::unordered_map<uint64_t, int>& counts) {
    if (static_cast<int>(tokens.size()) < n) return;
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
        uint64_t key = 0;
        for (int j = 0; j < n; ++j) key = (key << 32) | ids.id(tokens[i + j]);
        ++counts[key];
    }
}

}  // namespace rouge_detail

// Clipped n-gram overlap F1 over pre-normalized token sequences.
inline Score rouge_n_tokens(const std::vector<std::string>& cand,
                            const std::vector<std::string>& ref, int n) {
    using namespace rouge_detail;
    TokenIds ids;
    std::unordered_map<uint64_t, int> cand_counts, ref_counts;
    count_ngrams(cand, n, ids, cand_counts);
    count_ngrams(ref, n, ids, ref_counts);
    long long cand_total = 0, ref_total = 0, overlap = 0;
    for (const auto& [k, c] : cand_counts) cand_total += c;
    for (const auto& [k, c] : ref_counts) {
        ref_total += c;
        auto it = cand_counts.find(k);
        if (it != cand_counts.end()) overlap += std::min(c, it->second);
    }
    double p = cand_total > 0 ? static_cast<double>(overlap) / cand_total : 0.0;
    double r = ref_total > 0 ? static_cast<double>(overlap) / ref_total : 0.0;
    return make_score(p, r);
}

// Token-level longest common subsequence length.
inline size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (size_t i = 1; i <= a.size(); ++i) {
        for (size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1]) cur[j] = prev[j - 1] + 1;
            else cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// Summary-level LCS over the full normalized sequences.
inline Score rouge_l_tokens(const std::vector<std::string>& cand,
                            const std::vector<std::string>& ref) {
    size_t lcs = lcs_length(cand, ref);
    double p = cand.empty() ? 0.0 : static_cast<double>(lcs) / cand.size();
    double r = ref.empty() ? 0.0 : static_cast<double>(lcs) / ref.size();
    return make_score(p, r);
}

inline Score rouge_n(std::string_view candidate, std::string_view reference, int n,
                     NormalizeOpts opts = {}) {
    if (n != 1 && n != 2) throw Error("rouge_n: n must be 1 or 2");
    return rouge_n_tokens(normalize(candidate, opts), normalize(reference, opts), n);
}

inline Score rouge_l(std::string_view candidate, std::string_view reference,
                     NormalizeOpts opts = {}) {
    return rouge_l_tokens(normalize(candidate, opts), normalize(reference, opts));
}

inline RougeScore rouge_all_tokens(const std::vector<std::string>& cand,
                                   const std::vector<std::string>& ref) {
    RougeScore s;
    s.r1 = rouge_n_tokens(cand, ref, 1);
    s.r2 = rouge_n_tokens(cand, ref, 2);
    s.rl = rouge_l_tokens(cand, ref);
    return s;
}

inline RougeScore rouge_all(std::string_view candidate, std::string_view reference,
                            NormalizeOpts opts = {}) {
    return rouge_all_tokens(normalize(candidate, opts), normalize(reference, opts));
}

// Each of R1/R2/RL independently takes the max-F1 score over references.
inline RougeScore rouge_multi(std::string_view candidate,
                              const std::vector<std::string>& references,
                              NormalizeOpts opts = {}) {
    if (references.empty()) throw Error("rouge_multi: empty reference list");
    auto cand = normalize(candidate, opts);
    RougeScore best;
    bool first = true;
    for (const auto& ref_text : references) {
        RougeScore s = rouge_all_tokens(cand, normalize(ref_text, opts));
        if (first) {
            best = s;
            first = false;
            continue;
        }
        if (s.r1.f1 > best.r1.f1) best.r1 = s.r1;
        if (s.r2.f1 > best.r2.f1) best.r2 = s.r2;
        if (s.rl.f1 > best.rl.f1) best.rl = s.rl;
    }
    return best;
}

inline RougeScore mean_rouge(const std::vector<RougeScore>& scores) {
    RougeScore m;
    if (scores.empty()) return m;
    auto add = [](Score& acc, const Score& s) {
        acc.precision += s.precision;
        acc.recall += s.recall;
        acc.f1 += s.f1;
    };
    for (const auto& s : scores) {
        add(m.r1, s.r1);
        add(m.r2, s.r2);
        add(m.rl, s.rl);
    }
    auto div = [&](Score& s) {
        s.precision /= scores.size();
        s.recall /= scores.size();
        s.f1 /= scores.size();
    };
    div(m.r1);
    div(m.r2);
    div(m.rl);
    return m;
}

}  // namespace dialsum
