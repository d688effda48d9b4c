#pragma once

#include <cmath>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "dialsum/annotate.hpp"
#include "dialsum/io.hpp"
#include "dialsum/tokenizer.hpp"

namespace dialsum {

enum class LingFeature { Noun, Verb, Root };

struct PrefixPolicy {
    enum class Kind { WO, Const, Random, Ling } kind = Kind::WO;
    int const_len = 1;          // Const; also the Ling fallback length
    int random_lo = 1;          // Random
    int random_hi = 3;
    LingFeature feature = LingFeature::Noun;

    static PrefixPolicy wo() { return {}; }
    static PrefixPolicy constant(int k) {
        PrefixPolicy p;
        p.kind = Kind::Const;
        p.const_len = k;
        return p;
    }
    static PrefixPolicy random(int lo, int hi) {
        PrefixPolicy p;
        p.kind = Kind::Random;
        p.random_lo = lo;
        p.random_hi = hi;
        return p;
    }
    static PrefixPolicy ling(LingFeature f, int fallback_const = 2) {
        PrefixPolicy p;
        p.kind = Kind::Ling;
        p.feature = f;
        p.const_len = fallback_const;
        return p;
    }

    void validate() const {
        if (kind == Kind::Const && const_len < 1) throw Error("prefix policy: Const k must be >= 1");
        if (kind == Kind::Random && !(1 <= random_lo && random_lo <= random_hi))
            throw Error("prefix policy: Random requires 1 <= lo <= hi");
    }
};

inline PrefixPolicy parse_prefix_policy(std::string_view s, int const_len = 2, int random_lo = 1,
                                        int random_hi = 3) {
    if (s == "wo" || s == "w/o" || s == "none") return PrefixPolicy::wo();
    if (s == "const") return PrefixPolicy::constant(const_len);
    if (s == "random") return PrefixPolicy::random(random_lo, random_hi);
    if (s == "ling-noun") return PrefixPolicy::ling(LingFeature::Noun, const_len);
    if (s == "ling-verb") return PrefixPolicy::ling(LingFeature::Verb, const_len);
    if (s == "ling-root") return PrefixPolicy::ling(LingFeature::Root, const_len);
    throw Error("unknown prefix policy: " + std::string(s));
}

inline const char* prefix_policy_name(const PrefixPolicy& p) {
    switch (p.kind) {
        case PrefixPolicy::Kind::WO: return "wo";
        case PrefixPolicy::Kind::Const: return "const";
        case PrefixPolicy::Kind::Random: return "random";
        default:
            switch (p.feature) {
                case LingFeature::Noun: return "ling-noun";
                case LingFeature::Verb: return "ling-verb";
                default: return "ling-root";
            }
    }
}

struct PrefixAssignment {
    int a = 0;              // prefix length in model tokens, 0 <= a <= l-1
    int source_words = 0;   // words consumed by a Ling prefix
    bool fallback_used = false;
};

namespace prefix_detail {

inline bool feature_matches(const Word& w, LingFeature f) {
    switch (f) {
        case LingFeature::Noun: return w.pos == Pos::Noun || w.pos == Pos::Propn;
        case LingFeature::Verb: return w.pos == Pos::Verb;
        default: return w.is_root;
    }
}

}  // namespace prefix_detail

// Picks the number of decoder prefix tokens for one target. `annotation` is
// the target's first sentence (only consulted by Ling policies). Random draws
// are reproducible from rng_seed.
inline PrefixAssignment assign_prefix(std::string_view target,
                                      const SentenceAnnotation& annotation,
                                      const PrefixPolicy& policy, uint64_t rng_seed = 0) {
    policy.validate();
    PrefixAssignment out;
    if (policy.kind == PrefixPolicy::Kind::WO) return out;

    int l = static_cast<int>(Vocabulary::token_count(target));
    if (l < 2) throw Error("target too short to prefix: \"" + std::string(target) + "\"");

    switch (policy.kind) {
        case PrefixPolicy::Kind::Const:
            out.a = std::min(policy.const_len, l - 1);
            return out;
        case PrefixPolicy::Kind::Random: {
            std::mt19937_64 rng(rng_seed);
            std::uniform_int_distribution<int> dist(policy.random_lo, policy.random_hi);
            out.a = std::min(dist(rng), l - 1);
            return out;
        }
        default: {  // Ling
            int match = -1;
            for (size_t i = 0; i < annotation.words.size(); ++i) {
                if (prefix_detail::feature_matches(annotation.words[i], policy.feature)) {
                    match = static_cast<int>(i);
                    break;
                }
            }
            if (match < 0) {
                out.a = std::min(policy.const_len, l - 1);
                out.fallback_used = true;
                return out;
            }
            const Word& w = annotation.words[static_cast<size_t>(match)];
            std::string_view span = std::string_view(annotation.text).substr(0, w.end);
            out.a = std::min(static_cast<int>(Vocabulary::token_count(span)), l - 1);
            out.source_words = match + 1;
            return out;
        }
    }
}

// Convenience: annotates the first sentence of `target` with the fallback
// annotator, then assigns.
inline PrefixAssignment assign_prefix_fallback(std::string_view target,
                                               const PrefixPolicy& policy,
                                               uint64_t rng_seed = 0) {
    SentenceAnnotation ann;
    auto sents = split_sentences(target);
    if (!sents.empty()) ann = annotate_sentence_fallback(sents.front());
    return assign_prefix(target, ann, policy, rng_seed);
}

struct PrefixStats {
    double mean = 0.0;
    double stddev = 0.0;  // population std
    size_t n = 0;
};

inline PrefixStats prefix_stats(const std::vector<int>& assignments) {
    if (assignments.empty()) throw Error("prefix_stats: no assignments");
    PrefixStats st;
    st.n = assignments.size();
    double sum = 0.0;
    for (int a : assignments) sum += a;
    st.mean = sum / static_cast<double>(st.n);
    double sq = 0.0;
    for (int a : assignments) sq += (a - st.mean) * (a - st.mean);
    st.stddev = std::sqrt(sq / static_cast<double>(st.n));
    return st;
}

}  // namespace dialsum
