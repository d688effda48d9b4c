#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dialsum/corpus.hpp"
#include "dialsum/io.hpp"
#include "dialsum/rouge.hpp"

namespace dialsum {

// ---------------------------------------------------------------------------
// Rule-based baselines
// ---------------------------------------------------------------------------

inline std::string lead3(const Dialogue& d) {
    Dialogue head;
    size_t n = std::min<size_t>(3, d.turns.size());
    head.turns.assign(d.turns.begin(), d.turns.begin() + n);
    return serialize_dialogue(head);
}

// The min(3, T) turns with the most words, emitted in original turn order.
inline std::string longest3(const Dialogue& d) {
    std::vector<size_t> idx(d.turns.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
        return word_count(d.turns[a].text) > word_count(d.turns[b].text);
    });
    size_t n = std::min<size_t>(3, d.turns.size());
    std::vector<size_t> keep(idx.begin(), idx.begin() + n);
    std::sort(keep.begin(), keep.end());
    Dialogue out;
    for (size_t i : keep) out.turns.push_back(d.turns[i]);
    return serialize_dialogue(out);
}

// ---------------------------------------------------------------------------
// Corpus evaluation
// ---------------------------------------------------------------------------

struct EvalReport {
    RougeScore corpus_mean;
    std::vector<RougeScore> per_sample;
    std::vector<double> sample_cr;  // candidate-agnostic reference CR per sample
    std::optional<double> p_value_r2_vs_baseline;
};

inline double reference_cr(const Sample& s) {
    double iw = static_cast<double>(word_count(serialize_dialogue(s.dialogue)));
    double ow = 0.0;
    for (const auto& r : s.references) ow += static_cast<double>(word_count(r));
    ow /= static_cast<double>(s.references.size());
    return iw > 0.0 ? ow / iw : 0.0;
}

inline EvalReport evaluate(const std::vector<std::string>& candidates,
                           const std::vector<Sample>& samples, NormalizeOpts opts = {}) {
    if (candidates.size() != samples.size())
        throw Error("evaluate: " + std::to_string(candidates.size()) + " candidates vs " +
                    std::to_string(samples.size()) + " samples");
    if (samples.empty()) throw Error("evaluate: no samples");
    EvalReport report;
    for (size_t i = 0; i < samples.size(); ++i) {
        report.per_sample.push_back(rouge_multi(candidates[i], samples[i].references, opts));
        report.sample_cr.push_back(reference_cr(samples[i]));
    }
    report.corpus_mean = mean_rouge(report.per_sample);
    return report;
}

// ---------------------------------------------------------------------------
// CR buckets
// ---------------------------------------------------------------------------

struct CrBucket {
    double lo = 0.0;  // inclusive; -inf encoded as lowest()
    double hi = 0.0;  // exclusive; +inf encoded as max()
    size_t n = 0;
    double mean_r2_f1 = 0.0;
};

// k strictly increasing edges cut CR space into k+1 buckets; empty buckets
// are omitted from the result.
inline std::vector<CrBucket> cr_buckets(const EvalReport& report,
                                        const std::vector<double>& edges) {
    for (size_t i = 1; i < edges.size(); ++i)
        if (edges[i] <= edges[i - 1]) throw Error("cr_buckets: edges must be strictly increasing");
    size_t k = edges.size();
    std::vector<CrBucket> buckets(k + 1);
    for (size_t b = 0; b <= k; ++b) {
        buckets[b].lo = b == 0 ? std::numeric_limits<double>::lowest() : edges[b - 1];
        buckets[b].hi = b == k ? std::numeric_limits<double>::max() : edges[b];
    }
    for (size_t i = 0; i < report.sample_cr.size(); ++i) {
        double cr = report.sample_cr[i];
        size_t b = static_cast<size_t>(
            std::upper_bound(edges.begin(), edges.end(), cr) - edges.begin());
        ++buckets[b].n;
        buckets[b].mean_r2_f1 += report.per_sample[i].r2.f1;
    }
    std::vector<CrBucket> out;
    for (auto& b : buckets) {
        if (b.n == 0) continue;
        b.mean_r2_f1 /= static_cast<double>(b.n);
        out.push_back(b);
    }
    return out;
}

// Decile edges of the observed CR distribution; the Fig.-3-style default.
inline std::vector<double> decile_edges(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::vector<double> edges;
    if (values.size() < 10) return edges;
    for (int d = 1; d <= 9; ++d) {
        size_t pos = values.size() * static_cast<size_t>(d) / 10;
        double e = values[pos];
        if (edges.empty() || e > edges.back()) edges.push_back(e);
    }
    return edges;
}

// ---------------------------------------------------------------------------
// Paired t-test
// ---------------------------------------------------------------------------

namespace stat_detail {

// Regularized incomplete beta via Lentz's continued fraction.
inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-14, kFpMin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                   b * std::log(1.0 - x);
    double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

}  // namespace stat_detail

// Two-sided p-value for |T| >= |t| under Student's t with nu dof.
inline double student_t_two_sided_p(double t, double nu) {
    if (!std::isfinite(t)) return 0.0;
    double x = nu / (nu + t * t);
    return stat_detail::incomplete_beta(nu / 2.0, 0.5, x);
}

// Two-sided paired t-test on per-sample differences. Degenerate cases:
// all-zero differences -> p = 1; zero variance with nonzero mean -> p = 0.
inline double paired_ttest(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw Error("paired_ttest: length mismatch");
    size_t n = a.size();
    if (n < 2) throw Error("paired_ttest: need at least 2 paired samples");
    double mean = 0.0;
    for (size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double d = (a[i] - b[i]) - mean;
        var += d * d;
    }
    var /= static_cast<double>(n - 1);
    if (var == 0.0) return mean == 0.0 ? 1.0 : 0.0;
    double t = mean / std::sqrt(var / static_cast<double>(n));
    return student_t_two_sided_p(t, static_cast<double>(n - 1));
}

// ---------------------------------------------------------------------------
// Human evaluation aggregation
// ---------------------------------------------------------------------------

struct HumanRecord {
    std::string sample_id;
    std::string annotator;
    int score = 0;  // in {-2, 0, 2}
    bool mis = false, red = false, cor = false, rea = false;
};

inline HumanRecord parse_human_record(const std::string& line, size_t idx) {
    nlohmann::json rec;
    try {
        rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error("human record " + std::to_string(idx) + ": invalid JSON: " + e.what());
    }
    HumanRecord h;
    h.sample_id = rec.at("sample_id").get<std::string>();
    h.annotator = rec.at("annotator").get<std::string>();
    h.score = rec.at("score").get<int>();
    if (h.score != -2 && h.score != 0 && h.score != 2)
        throw Error("human record " + std::to_string(idx) + ": score must be in {-2, 0, 2}");
    h.mis = rec.value("mis", false);
    h.red = rec.value("red", false);
    h.cor = rec.value("cor", false);
    h.rea = rec.value("rea", false);
    return h;
}

inline std::vector<HumanRecord> load_human_records(const std::filesystem::path& path) {
    std::vector<HumanRecord> out;
    size_t idx = 0;
    for (const std::string& line : read_lines(path)) {
        if (trim(line).empty()) continue;
        out.push_back(parse_human_record(line, idx++));
    }
    if (out.empty()) throw Error("empty human record file: " + path.string());
    return out;
}

// MisRed = Mis OR Red; CorRea = Cor OR Rea.
inline std::pair<bool, bool> merge_error_flags(const HumanRecord& r) {
    return {r.mis || r.red, r.cor || r.rea};
}

inline bool majority_vote(const std::vector<bool>& flags) {
    size_t yes = 0;
    for (bool f : flags) yes += f ? 1 : 0;
    return yes * 2 >= flags.size() && yes > 0;
}

// Fleiss kappa over an items x categories count table. Every item must have
// the same total rating count (the rater count n >= 2).
inline double fleiss_kappa(const std::vector<std::vector<size_t>>& counts) {
    if (counts.empty()) throw Error("fleiss_kappa: no items");
    size_t n_categories = counts.front().size();
    if (n_categories < 1) throw Error("fleiss_kappa: no categories");
    size_t n_raters = std::accumulate(counts.front().begin(), counts.front().end(), size_t{0});
    if (n_raters < 2) throw Error("fleiss_kappa: need at least 2 raters");
    for (const auto& row : counts) {
        if (row.size() != n_categories) throw Error("fleiss_kappa: ragged count table");
        size_t total = std::accumulate(row.begin(), row.end(), size_t{0});
        if (total != n_raters) throw Error("fleiss_kappa: unequal rater counts across items");
    }
    size_t N = counts.size();
    double n = static_cast<double>(n_raters);

    double p_bar = 0.0;
    std::vector<double> p_cat(n_categories, 0.0);
    for (const auto& row : counts) {
        double agree = 0.0;
        for (size_t j = 0; j < n_categories; ++j) {
            double c = static_cast<double>(row[j]);
            agree += c * (c - 1.0);
            p_cat[j] += c;
        }
        p_bar += agree / (n * (n - 1.0));
    }
    p_bar /= static_cast<double>(N);
    double pe = 0.0;
    for (double& p : p_cat) {
        p /= static_cast<double>(N) * n;
        pe += p * p;
    }
    if (pe >= 1.0) return p_bar >= 1.0 ? 1.0 : 0.0;  // all mass in one category
    return (p_bar - pe) / (1.0 - pe);
}

// Groups records by sample and extracts one categorical label per record.
// Label extractor returns a small category index.
inline double fleiss_kappa_records(
    const std::vector<HumanRecord>& records, size_t n_categories,
    const std::function<size_t(const HumanRecord&)>& category) {
    std::map<std::string, std::vector<size_t>> by_sample;
    for (const auto& r : records) {
        auto& row = by_sample[r.sample_id];
        if (row.empty()) row.assign(n_categories, 0);
        size_t c = category(r);
        if (c >= n_categories) throw Error("fleiss_kappa: category out of range");
        ++row[c];
    }
    std::vector<std::vector<size_t>> counts;
    counts.reserve(by_sample.size());
    for (auto& [id, row] : by_sample) counts.push_back(std::move(row));
    return fleiss_kappa(counts);
}

}  // namespace dialsum
