#pragma once

#include <string>
#include <vector>

#include "dialsum/annotate.hpp"
#include "dialsum/prefix.hpp"
#include "dialsum/pseudo_data.hpp"

namespace dialsum {

// Computes and stores prefix_tokens for every pair at materialization time.
// Ling policies consult the target's first sentence; multi-sentence targets
// (DSum and friends) therefore use the first sentence's feature. Random
// policies derive a per-pair seed from the run seed and the pair identity.
inline void materialize_prefixes(std::vector<PseudoPair>& pairs, const PrefixPolicy& policy,
                                 const AnnotateOptions& opts = {}, uint64_t seed = 0) {
    policy.validate();
    if (policy.kind == PrefixPolicy::Kind::WO) {
        for (auto& p : pairs) p.prefix_tokens = 0;
        return;
    }

    std::vector<SentenceAnnotation> first_sentences(pairs.size());
    if (policy.kind == PrefixPolicy::Kind::Ling) {
        std::vector<std::string> firsts(pairs.size());
        for (size_t i = 0; i < pairs.size(); ++i) {
            auto sents = split_sentences(pairs[i].target);
            firsts[i] = sents.empty() ? pairs[i].target : sents.front();
        }
        std::vector<Annotation> anns = annotate_all(firsts, opts);
        for (size_t i = 0; i < pairs.size(); ++i) {
            if (!anns[i].sentences.empty()) {
                first_sentences[i] = anns[i].sentences.front();
            } else {
                first_sentences[i].text = firsts[i];
            }
        }
    }

    parallel_for(pairs.size(), opts.workers, [&](size_t i) {
        PseudoPair& p = pairs[i];
        uint64_t pair_seed =
            fnv1a(p.origin_id + "#" + std::to_string(p.sent_index), seed ^ 0x51caf3a5u);
        PrefixAssignment a = assign_prefix(p.target, first_sentences[i], policy, pair_seed);
        p.prefix_tokens = a.a;
    });
}

// Mean/std of the materialized assignments under a policy, for reporting.
inline PrefixStats prefix_stats_for(const std::vector<PseudoPair>& pairs) {
    std::vector<int> a;
    a.reserve(pairs.size());
    for (const auto& p : pairs) a.push_back(p.prefix_tokens);
    return prefix_stats(a);
}

}  // namespace dialsum
