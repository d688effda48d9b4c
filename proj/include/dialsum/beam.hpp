#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "dialsum/io.hpp"
#include "dialsum/model.hpp"
#include "dialsum/tokenizer.hpp"

namespace dialsum {

struct GenerationConfig {
    int beam_size = 4;
    double length_penalty = 1.0;
    int no_repeat_ngram = 3;  // 0 disables
    int min_len = 1;
    int max_len = 48;
    std::vector<int> forced_prefix;

    void validate() const {
        if (beam_size < 1) throw Error("generation: beam_size must be >= 1");
        if (min_len > max_len) throw Error("generation: min_len > max_len");
        if (static_cast<int>(forced_prefix.size()) >= max_len)
            throw Error("generation: forced prefix must be shorter than max_len");
    }
};

struct BeamResult {
    std::vector<int> ids;    // generated tokens, no BOS/EOS
    double score = 0.0;      // sum logprob / len^length_penalty
    bool degenerate = false; // every continuation was banned; partial output
};

namespace beam_detail {

struct Hypothesis {
    std::vector<int> tokens;
    double logprob = 0.0;
};

// Bans tokens that would close an n-gram already present in `tokens`
// (fairseq semantics: match on the trailing n-1 tokens).
inline void ban_repeated_ngrams(const std::vector<int>& tokens, int n,
                                std::vector<double>& row) {
    if (n <= 0) return;
    int len = static_cast<int>(tokens.size());
    if (len < n - 1) return;
    if (n == 1) {
        for (int tok : tokens)
            if (tok >= 0 && tok < static_cast<int>(row.size())) row[static_cast<size_t>(tok)] = -1e30;
        return;
    }
    std::span<const int> tail(tokens.data() + (len - (n - 1)), static_cast<size_t>(n - 1));
    for (int i = 0; i + n <= len; ++i) {
        bool match = true;
        for (int j = 0; j < n - 1; ++j)
            if (tokens[static_cast<size_t>(i + j)] != tail[static_cast<size_t>(j)]) {
                match = false;
                break;
            }
        if (match) {
            int banned = tokens[static_cast<size_t>(i + n - 1)];
            if (banned >= 0 && banned < static_cast<int>(row.size()))
                row[static_cast<size_t>(banned)] = -1e30;
        }
    }
}

inline double normalized_score(double logprob, size_t emitted, double alpha) {
    double len = std::max<double>(1.0, static_cast<double>(emitted));
    return logprob / std::pow(len, alpha);
}

}  // namespace beam_detail

// Standard beam search over a ModelContract. The output starts with
// forced_prefix verbatim, contains no repeated no_repeat_ngram-gram, and has
// min_len <= len <= max_len tokens (excluding BOS/EOS). Hypotheses are ranked
// by sum-logprob / len^length_penalty. If every continuation is banned the
// best partial hypothesis is returned with the degenerate flag set.
inline BeamResult beam_search(const ModelContract& model, std::span<const int> source,
                              const GenerationConfig& cfg) {
    using namespace beam_detail;
    cfg.validate();
    EncoderState state = model.encode(source);
    const int vocab = model.vocab_size();

    std::vector<Hypothesis> beams{Hypothesis{}};
    std::vector<std::pair<Hypothesis, double>> finished;  // hyp, normalized score
    bool dead_end = false;

    for (int step = 0; step < cfg.max_len; ++step) {
        struct Cand {
            size_t beam;
            int token;
            double logprob;
        };
        std::vector<Cand> cands;
        for (size_t b = 0; b < beams.size(); ++b) {
            Mat table = model.decoder_logprobs(state, beams[b].tokens);
            std::vector<double> row(table.data.end() - static_cast<long>(table.cols),
                                    table.data.end());
            if (step < static_cast<int>(cfg.forced_prefix.size())) {
                int forced = cfg.forced_prefix[static_cast<size_t>(step)];
                if (forced < 0 || forced >= vocab) throw Error("generation: forced token out of range");
                cands.push_back({b, forced, beams[b].logprob + row[static_cast<size_t>(forced)]});
                continue;
            }
            if (step < cfg.min_len) row[kEosId] = -1e30;
            row[kPadId] = -1e30;
            row[kBosId] = -1e30;
            ban_repeated_ngrams(beams[b].tokens, cfg.no_repeat_ngram, row);
            for (int tok = 0; tok < vocab; ++tok)
                if (row[static_cast<size_t>(tok)] > -1e29)
                    cands.push_back({b, tok, beams[b].logprob + row[static_cast<size_t>(tok)]});
        }

        if (cands.empty()) {  // every continuation of every live beam is banned
            dead_end = true;
            break;
        }
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.logprob != b.logprob) return a.logprob > b.logprob;
            if (a.beam != b.beam) return a.beam < b.beam;
            return a.token < b.token;
        });

        // EOS may finalize a hypothesis only from the top beam_size ranks;
        // lower-ranked EOS candidates are dropped so finished hypotheses
        // never starve the live beam.
        std::vector<Hypothesis> next;
        size_t rank = 0;
        for (const Cand& c : cands) {
            if (static_cast<int>(next.size()) >= cfg.beam_size) break;
            if (c.token == kEosId) {
                if (rank < static_cast<size_t>(cfg.beam_size)) {
                    Hypothesis h = beams[c.beam];
                    h.logprob = c.logprob;
                    size_t emitted = h.tokens.size() + 1;  // count EOS toward length
                    finished.emplace_back(
                        std::move(h), normalized_score(c.logprob, emitted, cfg.length_penalty));
                }
                ++rank;
                continue;
            }
            ++rank;
            Hypothesis h = beams[c.beam];
            h.logprob = c.logprob;
            h.tokens.push_back(c.token);
            next.push_back(std::move(h));
        }
        beams = std::move(next);
        if (beams.empty()) break;  // every surviving candidate finished
    }

    // Hypotheses still alive at max_len (or stranded by a dead end) finish
    // without an explicit EOS.
    bool finished_via_eos = !finished.empty();
    for (auto& h : beams)
        finished.emplace_back(h, normalized_score(h.logprob, std::max<size_t>(h.tokens.size(), 1),
                                                  cfg.length_penalty));

    BeamResult result;
    if (finished.empty()) {
        result.degenerate = true;
        return result;
    }
    auto best = std::max_element(finished.begin(), finished.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });
    result.ids = best->first.tokens;
    result.score = best->second;
    result.degenerate = dead_end && !finished_via_eos;
    return result;
}

// Greedy = beam size 1; used by tests to pin the equivalence down.
inline BeamResult greedy_decode(const ModelContract& model, std::span<const int> source,
                                GenerationConfig cfg) {
    cfg.beam_size = 1;
    return beam_search(model, source, cfg);
}

}  // namespace dialsum
