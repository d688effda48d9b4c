#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dialsum/annotate.hpp"
#include "dialsum/annotate_external.hpp"
#include "dialsum/corpus.hpp"
#include "dialsum/rouge.hpp"

namespace dialsum {

enum class Variant { DSum, DialSent, DialIndirect, ExtSum, ExtSumM, ExtSent, ExtSentM };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::DSum: return "dsum";
        case Variant::DialSent: return "dialsent";
        case Variant::DialIndirect: return "dialindirect";
        case Variant::ExtSum: return "extsum";
        case Variant::ExtSumM: return "extsumm";
        case Variant::ExtSent: return "extsent";
        default: return "extsentm";
    }
}

inline Variant parse_variant(std::string_view s) {
    for (Variant v : {Variant::DSum, Variant::DialSent, Variant::DialIndirect, Variant::ExtSum,
                      Variant::ExtSumM, Variant::ExtSent, Variant::ExtSentM})
        if (s == variant_name(v)) return v;
    throw Error("unknown dataset variant: " + std::string(s));
}

inline bool variant_is_sentence_level(Variant v) {
    return v == Variant::DialSent || v == Variant::ExtSent || v == Variant::ExtSentM;
}

struct PseudoPair {
    std::string source;
    std::string target;
    std::string origin_id;
    int sent_index = -1;  // -1 = none (whole-summary variants)
    Variant variant = Variant::DSum;
    int prefix_tokens = 0;
};

struct ExtractionResult {
    std::vector<size_t> indices;      // strictly increasing turn indices
    double score = 0.0;               // objective value at termination
    std::vector<double> step_scores;  // objective after each greedy addition
};

struct AnnotateOptions {
    AnnotateBackend backend = AnnotateBackend::fallback;
    std::string external_cmd;  // empty = read DIALSUM_ANNOTATOR_CMD
    size_t workers = 1;
};

inline std::vector<Annotation> annotate_all(const std::vector<std::string>& texts,
                                            const AnnotateOptions& opts) {
    std::vector<Annotation> out(texts.size());
    if (opts.backend == AnnotateBackend::fallback) {
        parallel_for(texts.size(), opts.workers,
                     [&](size_t i) { out[i] = annotate_fallback(texts[i]); });
        return out;
    }
    std::string cmd = opts.external_cmd;
    if (cmd.empty()) {
        const char* env = std::getenv("DIALSUM_ANNOTATOR_CMD");
        if (!env || !*env) throw Error("annotator: DIALSUM_ANNOTATOR_CMD is not set");
        cmd = env;
    }
    ExternalAnnotator annotator(cmd, opts.workers);
    return annotator.annotate_batch(texts);
}

// ---------------------------------------------------------------------------
// Greedy oracle extraction
// ---------------------------------------------------------------------------

namespace pseudo_detail {

inline double extraction_objective(const std::vector<std::string>& cand_tokens,
                                   const std::vector<std::string>& target_tokens) {
    Score r1 = rouge_n_tokens(cand_tokens, target_tokens, 1);
    Score r2 = rouge_n_tokens(cand_tokens, target_tokens, 2);
    return 0.5 * (r1.f1 + r2.f1);
}

}  // namespace pseudo_detail

// Greedy turn selection maximizing mean(ROUGE-1 F1, ROUGE-2 F1) of the
// selected turns (serialized in dialogue order) against `target`. The first
// turn is always committed (ties break toward the lowest index); afterwards
// the loop stops as soon as no addition strictly improves the objective.
// `modified` closes the selection to the contiguous range [min, max].
inline ExtractionResult oracle_extract(const Dialogue& d, std::string_view target,
                                       bool modified, NormalizeOpts opts = {}) {
    using namespace pseudo_detail;
    const size_t T = d.turns.size();
    if (T == 0) throw Error("oracle_extract: dialogue has no turns");
    std::vector<std::string> target_tokens = normalize(target, opts);

    std::vector<std::vector<std::string>> turn_tokens(T);
    for (size_t t = 0; t < T; ++t) {
        Dialogue one;
        one.turns = {d.turns[t]};
        turn_tokens[t] = normalize(serialize_dialogue(one), opts);
    }

    std::vector<bool> selected(T, false);
    auto candidate_tokens = [&](size_t extra) {
        std::vector<std::string> toks;
        for (size_t t = 0; t < T; ++t)
            if (selected[t] || t == extra)
                toks.insert(toks.end(), turn_tokens[t].begin(), turn_tokens[t].end());
        return toks;
    };

    ExtractionResult result;
    double best_score = -1.0;
    for (size_t step = 0; step < T; ++step) {
        double step_best = -1.0;
        size_t step_arg = T;
        for (size_t t = 0; t < T; ++t) {
            if (selected[t]) continue;
            double s = extraction_objective(candidate_tokens(t), target_tokens);
            if (s > step_best) {  // strict: ties keep the lowest index
                step_best = s;
                step_arg = t;
            }
        }
        if (step_arg == T) break;
        bool first = result.indices.empty();
        if (!first && step_best <= best_score) break;
        selected[step_arg] = true;
        result.indices.push_back(step_arg);
        best_score = first ? std::max(step_best, 0.0) : step_best;
        result.step_scores.push_back(best_score);
    }
    std::sort(result.indices.begin(), result.indices.end());

    if (modified && !result.indices.empty()) {
        size_t lo = result.indices.front(), hi = result.indices.back();
        result.indices.clear();
        for (size_t t = lo; t <= hi; ++t) result.indices.push_back(t);
        std::vector<std::string> toks;
        for (size_t t = lo; t <= hi; ++t)
            toks.insert(toks.end(), turn_tokens[t].begin(), turn_tokens[t].end());
        result.score = extraction_objective(toks, target_tokens);
    } else {
        result.score = std::max(best_score, 0.0);
    }
    return result;
}

inline Dialogue subset_dialogue(const Dialogue& d, const std::vector<size_t>& indices) {
    Dialogue out;
    out.id = d.id;
    for (size_t t : indices) out.turns.push_back(d.turns[t]);
    return out;
}

// ---------------------------------------------------------------------------
// Dataset builders
// ---------------------------------------------------------------------------

// Coref-resolved summary sentences with >= 3 words, in sentence order.
inline std::vector<std::string> resolved_sentences(std::string_view summary,
                                                   const Annotation& ann) {
    std::string resolved = resolve_coreferences(summary, ann);
    std::vector<std::string> kept;
    for (const auto& sent : split_sentences(resolved))
        if (word_count(sent) >= 3) kept.push_back(sent);
    return kept;
}

// One pair (serialized full dialogue, sentence) per surviving sentence.
inline std::vector<PseudoPair> build_dialsent(const std::vector<Sample>& samples,
                                              const AnnotateOptions& opts = {}) {
    std::vector<std::string> summaries;
    summaries.reserve(samples.size());
    for (const auto& s : samples) summaries.push_back(s.references.front());
    std::vector<Annotation> anns = annotate_all(summaries, opts);

    std::vector<std::vector<PseudoPair>> per_sample(samples.size());
    parallel_for(samples.size(), opts.workers, [&](size_t i) {
        const Sample& s = samples[i];
        std::string source = serialize_dialogue(s.dialogue);
        int sent_index = 0;
        for (const auto& sent : resolved_sentences(summaries[i], anns[i])) {
            PseudoPair p;
            p.source = source;
            p.target = sent;
            p.origin_id = s.dialogue.id;
            p.sent_index = sent_index++;
            p.variant = Variant::DialSent;
            per_sample[i].push_back(std::move(p));
        }
    });
    std::vector<PseudoPair> pairs;
    for (auto& chunk : per_sample)
        for (auto& p : chunk) pairs.push_back(std::move(p));
    return pairs;
}

// One pair per sample; the target renders every turn as `speaker says,"text"`.
inline std::vector<PseudoPair> build_dialindirect(const std::vector<Sample>& samples) {
    std::vector<PseudoPair> pairs;
    pairs.reserve(samples.size());
    for (const auto& s : samples) {
        std::string target;
        for (size_t t = 0; t < s.dialogue.turns.size(); ++t) {
            if (t > 0) target += ' ';
            target += s.dialogue.turns[t].speaker;
            target += " says,\"";
            target += s.dialogue.turns[t].text;
            target += '"';
        }
        PseudoPair p;
        p.source = serialize_dialogue(s.dialogue);
        p.target = std::move(target);
        p.origin_id = s.dialogue.id;
        p.variant = Variant::DialIndirect;
        pairs.push_back(std::move(p));
    }
    return pairs;
}

// One pair per sample: source = extracted turns, target = raw full summary.
inline std::vector<PseudoPair> build_extsum(const std::vector<Sample>& samples, bool modified,
                                            size_t workers = 1) {
    std::vector<PseudoPair> pairs(samples.size());
    parallel_for(samples.size(), workers, [&](size_t i) {
        const Sample& s = samples[i];
        ExtractionResult ext = oracle_extract(s.dialogue, s.references.front(), modified);
        PseudoPair p;
        p.source = serialize_dialogue(subset_dialogue(s.dialogue, ext.indices));
        p.target = s.references.front();
        p.origin_id = s.dialogue.id;
        p.variant = modified ? Variant::ExtSumM : Variant::ExtSum;
        pairs[i] = std::move(p);
    });
    return pairs;
}

// Per resolved summary sentence: source = turns extracted against that
// sentence, target = the sentence. Pair count equals build_dialsent's.
inline std::vector<PseudoPair> build_extsent(const std::vector<Sample>& samples, bool modified,
                                             const AnnotateOptions& opts = {}) {
    std::vector<std::string> summaries;
    summaries.reserve(samples.size());
    for (const auto& s : samples) summaries.push_back(s.references.front());
    std::vector<Annotation> anns = annotate_all(summaries, opts);

    std::vector<std::vector<PseudoPair>> per_sample(samples.size());
    parallel_for(samples.size(), opts.workers, [&](size_t i) {
        const Sample& s = samples[i];
        int sent_index = 0;
        for (const auto& sent : resolved_sentences(summaries[i], anns[i])) {
            ExtractionResult ext = oracle_extract(s.dialogue, sent, modified);
            PseudoPair p;
            p.source = serialize_dialogue(subset_dialogue(s.dialogue, ext.indices));
            p.target = sent;
            p.origin_id = s.dialogue.id;
            p.sent_index = sent_index++;
            p.variant = modified ? Variant::ExtSentM : Variant::ExtSent;
            per_sample[i].push_back(std::move(p));
        }
    });
    std::vector<PseudoPair> pairs;
    for (auto& chunk : per_sample)
        for (auto& p : chunk) pairs.push_back(std::move(p));
    return pairs;
}

// One pair per sample with the untouched full summary as target.
inline std::vector<PseudoPair> build_dsum(const std::vector<Sample>& samples) {
    std::vector<PseudoPair> pairs;
    pairs.reserve(samples.size());
    for (const auto& s : samples) {
        PseudoPair p;
        p.source = serialize_dialogue(s.dialogue);
        p.target = s.references.front();
        p.origin_id = s.dialogue.id;
        p.variant = Variant::DSum;
        pairs.push_back(std::move(p));
    }
    return pairs;
}

inline std::vector<PseudoPair> build_variant(Variant v, const std::vector<Sample>& samples,
                                             const AnnotateOptions& opts = {}) {
    switch (v) {
        case Variant::DSum: return build_dsum(samples);
        case Variant::DialSent: return build_dialsent(samples, opts);
        case Variant::DialIndirect: return build_dialindirect(samples);
        case Variant::ExtSum: return build_extsum(samples, false, opts.workers);
        case Variant::ExtSumM: return build_extsum(samples, true, opts.workers);
        case Variant::ExtSent: return build_extsent(samples, false, opts);
        default: return build_extsent(samples, true, opts);
    }
}

// ---------------------------------------------------------------------------
// Pair records: {source, target, origin_id, sent_index, variant, prefix_tokens}
// ---------------------------------------------------------------------------

inline std::string to_pair_line(const PseudoPair& p) {
    nlohmann::json rec;
    rec["source"] = p.source;
    rec["target"] = p.target;
    rec["origin_id"] = p.origin_id;
    if (p.sent_index >= 0) rec["sent_index"] = p.sent_index;
    else rec["sent_index"] = nullptr;
    rec["variant"] = variant_name(p.variant);
    rec["prefix_tokens"] = p.prefix_tokens;
    return rec.dump();
}

inline void save_pairs(const std::vector<PseudoPair>& pairs, const std::filesystem::path& path) {
    std::string out;
    for (const auto& p : pairs) {
        out += to_pair_line(p);
        out += '\n';
    }
    write_file_atomic(path, out);
}

inline std::vector<PseudoPair> load_pairs(const std::filesystem::path& path) {
    std::vector<PseudoPair> pairs;
    size_t idx = 0;
    for (const std::string& line : read_lines(path)) {
        if (trim(line).empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error("pair record " + std::to_string(idx) + ": invalid JSON: " + e.what());
        }
        PseudoPair p;
        p.source = rec.at("source").get<std::string>();
        p.target = rec.at("target").get<std::string>();
        p.origin_id = rec.value("origin_id", std::string{});
        p.sent_index = rec.contains("sent_index") && !rec["sent_index"].is_null()
                           ? rec["sent_index"].get<int>()
                           : -1;
        p.variant = parse_variant(rec.value("variant", "dsum"));
        p.prefix_tokens = rec.value("prefix_tokens", 0);
        if (p.source.empty() || p.target.empty())
            throw Error("pair record " + std::to_string(idx) + ": empty source or target");
        pairs.push_back(std::move(p));
        ++idx;
    }
    if (pairs.empty()) throw Error("empty pair file: " + path.string());
    return pairs;
}

}  // namespace dialsum
