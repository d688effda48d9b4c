#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dialsum/beam.hpp"
#include "dialsum/corpus.hpp"
#include "dialsum/io.hpp"
#include "dialsum/model.hpp"
#include "dialsum/pseudo_data.hpp"
#include "dialsum/rouge.hpp"
#include "dialsum/tokenizer.hpp"

namespace dialsum {

struct TrainConfig {
    double learning_rate = 3e-5;
    double weight_decay = 0.01;
    int warmup_steps = 500;
    double dropout = 0.1;
    int patience = 3;
    int max_epochs = 10;
    int max_source_tokens = 1024;
    std::vector<uint64_t> seeds = {13, 42, 1337};
    int batch_size = 0;  // required, no paper default

    void validate() const {
        if (batch_size < 1) throw Error("train config: batch_size is required (>= 1)");
        if (patience > max_epochs && max_epochs > 0)
            throw Error("train config: patience must be <= max_epochs");
        if (learning_rate <= 0 || weight_decay < 0) throw Error("train config: rates must be > 0");
        if (seeds.empty()) throw Error("train config: at least one seed");
    }
};

struct RunManifest {
    std::string stage;  // "post_train" | "fine_tune"
    std::string variant;
    std::string policy;
    std::vector<double> val_rouge2;    // one entry per completed epoch
    std::vector<double> train_loss;    // per-epoch mean training loss
    int chosen_epoch = 0;              // 1-based argmax of val_rouge2; 0 = none
    uint64_t seed = 0;
    std::string checkpoint;
    bool failed = false;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["stage"] = stage;
        j["variant"] = variant;
        j["policy"] = policy;
        j["val_rouge2"] = val_rouge2;
        j["train_loss"] = train_loss;
        j["chosen_epoch"] = chosen_epoch;
        j["seed"] = seed;
        j["checkpoint"] = checkpoint;
        j["failed"] = failed;
        return j;
    }

    void save(const std::filesystem::path& path) const {
        write_file_atomic(path, to_json().dump(2) + "\n");
    }
};

struct TrainResult {
    RunManifest manifest;
    std::filesystem::path checkpoint_dir;
};

// Stops after `patience` consecutive epochs without strict improvement.
class EarlyStopTracker {
public:
    explicit EarlyStopTracker(int patience) : patience_(patience) {}

    bool update(double score) {  // returns true when score improved
        if (!has_best_ || score > best_) {
            best_ = score;
            has_best_ = true;
            streak_ = 0;
            return true;
        }
        ++streak_;
        return false;
    }

    bool should_stop() const { return streak_ >= patience_; }
    double best() const { return best_; }

private:
    int patience_;
    int streak_ = 0;
    double best_ = 0.0;
    bool has_best_ = false;
};

namespace trainer_detail {

struct Example {
    std::vector<int> source;
    std::vector<int> target;       // target ids + EOS
    int prefix_len = 0;
    std::string target_text;       // for validation scoring
    std::vector<std::string> references;  // fine-tune validation scoring
};

inline Example make_example(const Vocabulary& vocab, const PseudoPair& pair, int max_src,
                            bool use_prefix) {
    Example ex;
    ex.source = vocab.encode(pair.source);
    if (ex.source.size() > static_cast<size_t>(max_src))
        ex.source.resize(static_cast<size_t>(max_src));
    ex.target = vocab.encode(pair.target);
    ex.target.push_back(kEosId);
    int l = static_cast<int>(ex.target.size());
    ex.prefix_len = use_prefix ? std::clamp(pair.prefix_tokens, 0, l - 1) : 0;
    ex.target_text = pair.target;
    ex.references = {pair.target};
    return ex;
}

// Sort-by-length bucketing, bucket order shuffled per epoch from the seed.
inline std::vector<std::vector<size_t>> make_batches(const std::vector<Example>& examples,
                                                     int batch_size, uint64_t seed, int epoch) {
    std::vector<size_t> order(examples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (examples[a].source.size() != examples[b].source.size())
            return examples[a].source.size() < examples[b].source.size();
        return examples[a].target.size() < examples[b].target.size();
    });
    std::vector<std::vector<size_t>> batches;
    for (size_t i = 0; i < order.size(); i += static_cast<size_t>(batch_size)) {
        size_t end = std::min(order.size(), i + static_cast<size_t>(batch_size));
        batches.emplace_back(order.begin() + static_cast<long>(i),
                             order.begin() + static_cast<long>(end));
    }
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + static_cast<uint64_t>(epoch));
    std::shuffle(batches.begin(), batches.end(), rng);
    return batches;
}

inline double validation_rouge2(ToySeq2Seq& model, const Vocabulary& vocab,
                                const std::vector<Example>& val, const GenerationConfig& gen_cfg,
                                bool force_prefix, std::vector<std::string>* decodes = nullptr) {
    if (val.empty()) return 0.0;
    model.set_train_mode(false);
    double acc = 0.0;
    for (const auto& ex : val) {
        GenerationConfig g = gen_cfg;
        if (force_prefix) {
            // first 3 target tokens are given, per the fixed validation protocol
            int n = std::min<int>(3, static_cast<int>(ex.target.size()) - 1);
            n = std::max(n, 0);
            g.forced_prefix.assign(ex.target.begin(), ex.target.begin() + n);
        }
        BeamResult dec = beam_search(model, ex.source, g);
        std::string text = vocab.decode(dec.ids);
        if (decodes) decodes->push_back(text);
        acc += rouge_multi(text, ex.references).r2.f1;
    }
    return acc / static_cast<double>(val.size());
}

inline void scale_gradients(ToySeq2Seq& model, double factor) {
    for (Param* p : model.parameters())
        for (auto& g : p->grad.data) g *= factor;
}

// Shared training loop for both stages.
inline TrainResult run_training(ToySeq2Seq& model, const Vocabulary& vocab,
                                const std::vector<Example>& train,
                                const std::vector<Example>& val, const TrainConfig& cfg,
                                const GenerationConfig& gen_cfg, bool force_val_prefix,
                                const std::filesystem::path& out_dir, RunManifest manifest) {
    namespace fs = std::filesystem;
    cfg.validate();
    if (train.empty()) throw Error("training: empty dataset");
    fs::create_directories(out_dir / "checkpoints");
    fs::create_directories(out_dir / "val_decodes");

    AdamW optimizer(model.parameters());
    EarlyStopTracker stopper(cfg.patience);
    fs::path best_dir = out_dir / "checkpoints" / "best";
    manifest.checkpoint = best_dir.string();

    if (cfg.max_epochs == 0) {  // identity run: hand back the input parameters
        save_checkpoint(model, vocab, best_dir, manifest.stage);
        manifest.save(out_dir / "manifest.json");
        return {manifest, best_dir};
    }

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        model.set_train_mode(true);
        double epoch_loss = 0.0;
        size_t n_examples = 0;
        bool nan_seen = false;
        for (const auto& batch : make_batches(train, cfg.batch_size, cfg.seeds.front(), epoch)) {
            model.zero_grad();
            double batch_loss = 0.0;
            for (size_t idx : batch) {
                const Example& ex = train[idx];
                batch_loss += model.accumulate_prefix_loss(ex.source, ex.target, ex.prefix_len);
            }
            if (!std::isfinite(batch_loss)) {
                nan_seen = true;
                break;
            }
            scale_gradients(model, 1.0 / static_cast<double>(batch.size()));
            double warm = cfg.warmup_steps > 0
                              ? std::min(1.0, static_cast<double>(optimizer.steps() + 1) /
                                                  static_cast<double>(cfg.warmup_steps))
                              : 1.0;
            optimizer.step(cfg.learning_rate * warm, cfg.weight_decay);
            epoch_loss += batch_loss;
            n_examples += batch.size();
        }
        if (nan_seen) {
            manifest.failed = true;
            manifest.save(out_dir / "manifest.json");
            return {manifest, best_dir};
        }
        manifest.train_loss.push_back(epoch_loss / static_cast<double>(n_examples));

        std::vector<std::string> decodes;
        double r2 = validation_rouge2(model, vocab, val, gen_cfg, force_val_prefix, &decodes);
        manifest.val_rouge2.push_back(r2);
        std::string dump;
        for (const auto& d : decodes) {
            dump += d;
            dump += '\n';
        }
        write_file_atomic(out_dir / "val_decodes" / ("epoch_" + std::to_string(epoch) + ".txt"),
                          dump);

        if (stopper.update(r2)) {
            manifest.chosen_epoch = epoch;
            save_checkpoint(model, vocab, best_dir, manifest.stage);
        }
        if (stopper.should_stop()) break;
    }
    manifest.save(out_dir / "manifest.json");
    return {manifest, best_dir};
}

}  // namespace trainer_detail

// Post-training on pseudo-paraphrase pairs with the prefix-masked loss.
// Validation decodes force the first 3 target tokens.
inline TrainResult post_train(ToySeq2Seq& model, const Vocabulary& vocab,
                              const std::vector<PseudoPair>& train_pairs,
                              const std::vector<PseudoPair>& val_pairs, const TrainConfig& cfg,
                              const GenerationConfig& gen_cfg,
                              const std::filesystem::path& out_dir,
                              const std::string& policy_name = "") {
    using namespace trainer_detail;
    cfg.validate();
    if (train_pairs.empty()) throw Error("post_train: empty dataset");
    std::vector<Example> train, val;
    for (const auto& p : train_pairs)
        train.push_back(make_example(vocab, p, cfg.max_source_tokens, /*use_prefix=*/true));
    for (const auto& p : val_pairs)
        val.push_back(make_example(vocab, p, cfg.max_source_tokens, /*use_prefix=*/true));
    RunManifest manifest;
    manifest.stage = "post_train";
    manifest.variant = train_pairs.empty() ? "" : variant_name(train_pairs.front().variant);
    manifest.policy = policy_name;
    manifest.seed = cfg.seeds.front();
    return run_training(model, vocab, train, val, cfg, gen_cfg, /*force_val_prefix=*/true,
                        out_dir, std::move(manifest));
}

// Fine-tuning on full dialogue->summary samples: a = 0, validation decodes
// have no forced prefix and score against every reference.
inline TrainResult fine_tune(ToySeq2Seq& model, const Vocabulary& vocab,
                             const std::vector<Sample>& train_samples,
                             const std::vector<Sample>& val_samples, const TrainConfig& cfg,
                             const GenerationConfig& gen_cfg,
                             const std::filesystem::path& out_dir) {
    using namespace trainer_detail;
    cfg.validate();
    if (train_samples.empty()) throw Error("fine_tune: empty dataset");
    auto to_examples = [&](const std::vector<Sample>& samples) {
        std::vector<Example> out;
        for (const auto& s : samples) {
            PseudoPair p;
            p.source = serialize_dialogue(s.dialogue);
            p.target = s.references.front();
            Example ex = make_example(vocab, p, cfg.max_source_tokens, /*use_prefix=*/false);
            ex.references = s.references;
            out.push_back(std::move(ex));
        }
        return out;
    };
    RunManifest manifest;
    manifest.stage = "fine_tune";
    manifest.variant = "dsum";
    manifest.seed = cfg.seeds.front();
    return run_training(model, vocab, to_examples(train_samples), to_examples(val_samples), cfg,
                        gen_cfg, /*force_val_prefix=*/false, out_dir, std::move(manifest));
}

// ---------------------------------------------------------------------------
// Seed/variant/policy matrix
// ---------------------------------------------------------------------------

struct MatrixCell {
    std::string variant;
    std::string policy;
};

struct MatrixRow {
    std::string variant;
    std::string policy;
    uint64_t seed = 0;
    RougeScore test_score;
};

struct MatrixReport {
    std::vector<MatrixRow> runs;       // every (variant, policy, seed)
    std::vector<MatrixRow> best_rows;  // per cell, best test ROUGE-2 F1 by seed
};

// Executes run_cell for each (variant, policy, seed) and keeps the best seed
// per cell by test ROUGE-2 F1.
inline MatrixReport run_matrix(
    const std::vector<MatrixCell>& cells, const std::vector<uint64_t>& seeds,
    const std::function<RougeScore(const MatrixCell&, uint64_t)>& run_cell) {
    if (seeds.empty()) throw Error("run_matrix: at least one seed");
    MatrixReport report;
    for (const auto& cell : cells) {
        std::optional<MatrixRow> best;
        for (uint64_t seed : seeds) {
            MatrixRow row{cell.variant, cell.policy, seed, run_cell(cell, seed)};
            report.runs.push_back(row);
            if (!best || row.test_score.r2.f1 > best->test_score.r2.f1) best = row;
        }
        report.best_rows.push_back(*best);
    }
    return report;
}

}  // namespace dialsum
