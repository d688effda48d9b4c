#pragma once

#include <cstring>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dialsum/autograd.hpp"
#include "dialsum/io.hpp"
#include "dialsum/tokenizer.hpp"

namespace dialsum {

struct EncoderState {
    Mat hidden;               // one row per source position
    std::vector<int> source;  // ids actually encoded (post truncation)
};

// Minimal trainable encoder-decoder surface. decoder_logprobs returns
// len(prefix)+1 rows; row t is the log-probability of target position t given
// prefix[0..t-1] (BOS handling is the model's business). Every row is
// log-normalized: logsumexp(row) == 0 within 1e-4.
class ModelContract {
public:
    virtual ~ModelContract() = default;

    virtual int vocab_size() const = 0;
    virtual EncoderState encode(std::span<const int> source) const = 0;
    virtual Mat decoder_logprobs(const EncoderState& state,
                                 std::span<const int> prefix) const = 0;

    // Training surface; decode-only models can keep the defaults.
    virtual std::vector<Param*> parameters() { return {}; }
    virtual void zero_grad() {
        for (Param* p : parameters()) p->grad.zero();
    }
    // Adds d(loss)/d(params) into the gradient accumulators, returns the loss.
    virtual double accumulate_prefix_loss(std::span<const int> /*source*/,
                                       std::span<const int> /*target*/, int /*prefix_len*/) {
        throw Error("model is not trainable");
    }
    virtual void set_train_mode(bool /*on*/) {}
};

// ---------------------------------------------------------------------------
// Reference toy model: a small encoder-decoder transformer
// ---------------------------------------------------------------------------

struct ToyModelConfig {
    int vocab = 0;
    int d_model = 32;
    int n_layers = 2;
    int n_heads = 2;
    int d_ff = 64;
    int max_positions = 192;
    int max_source_tokens = 1024;  // sources are truncated here at encode time
    double dropout = 0.1;
    uint64_t seed = 42;

    std::string hash_key() const {
        return std::to_string(vocab) + ":" + std::to_string(d_model) + ":" +
               std::to_string(n_layers) + ":" + std::to_string(n_heads) + ":" +
               std::to_string(d_ff) + ":" + std::to_string(max_positions) + ":" +
               std::to_string(max_source_tokens);
    }
};

class ToySeq2Seq : public ModelContract {
public:
    explicit ToySeq2Seq(ToyModelConfig cfg) : cfg_(cfg), rng_(cfg.seed) {
        if (cfg_.vocab < 5) throw Error("toy model: vocab too small");
        if (cfg_.d_model % cfg_.n_heads != 0)
            throw Error("toy model: d_model must be divisible by n_heads");
        init_params();
    }

    const ToyModelConfig& config() const { return cfg_; }
    int vocab_size() const override { return cfg_.vocab; }

    std::vector<Param*> parameters() override {
        std::vector<Param*> out;
        out.reserve(params_.size());
        for (auto& p : params_) out.push_back(p.get());
        return out;
    }

    void set_train_mode(bool on) override { train_mode_ = on; }

    EncoderState encode(std::span<const int> source) const override {
        EncoderState st;
        size_t n = std::min(source.size(), static_cast<size_t>(cfg_.max_source_tokens));
        n = std::min(n, static_cast<size_t>(cfg_.max_positions));
        st.source.assign(source.begin(), source.begin() + n);
        if (st.source.empty()) st.source.push_back(kBosId);
        Tape tape;
        st.hidden = run_encoder(tape, st.source, /*dropout=*/false)->val;
        return st;
    }

    Mat decoder_logprobs(const EncoderState& state,
                         std::span<const int> prefix) const override {
        Tape tape;
        Tape::NodeRef enc = tape.leaf(state.hidden);
        std::vector<int> dec_in;
        dec_in.push_back(kBosId);
        dec_in.insert(dec_in.end(), prefix.begin(), prefix.end());
        clamp_positions(dec_in);
        return run_decoder(tape, enc, dec_in, /*dropout=*/false)->val;
    }

    double accumulate_prefix_loss(std::span<const int> source, std::span<const int> target,
                               int prefix_len) override {
        if (target.empty()) throw Error("toy model: empty target");
        if (prefix_len < 0 || prefix_len >= static_cast<int>(target.size()))
            throw Error("toy model: prefix length must satisfy 0 <= a <= l-1");
        Tape tape;
        std::vector<int> src(source.begin(), source.end());
        if (src.size() > static_cast<size_t>(cfg_.max_source_tokens))
            src.resize(static_cast<size_t>(cfg_.max_source_tokens));
        if (src.size() > static_cast<size_t>(cfg_.max_positions))
            src.resize(static_cast<size_t>(cfg_.max_positions));
        if (src.empty()) src.push_back(kBosId);
        bool use_dropout = train_mode_ && cfg_.dropout > 0.0;
        Tape::NodeRef enc = run_encoder(tape, src, use_dropout);

        std::vector<int> dec_in;
        dec_in.push_back(kBosId);
        dec_in.insert(dec_in.end(), target.begin(), target.end() - 1);
        clamp_positions(dec_in);
        std::vector<int> tgt(target.begin(), target.end());
        if (tgt.size() > dec_in.size()) tgt.resize(dec_in.size());

        Tape::NodeRef logprobs = run_decoder(tape, enc, dec_in, use_dropout);
        Tape::NodeRef loss =
            tape.prefix_guided_nll(logprobs, tgt, std::min<int>(prefix_len, static_cast<int>(tgt.size()) - 1));
        tape.backward(loss);
        return loss->val.at(0, 0);
    }

    std::mt19937_64& rng() { return rng_; }

private:
    struct LayerParams {
        Param *wq, *wk, *wv, *wo;
        Param *ln1_g, *ln1_b;
        Param *ffn_w1, *ffn_b1, *ffn_w2, *ffn_b2;
        Param *ln2_g, *ln2_b;
        // decoder-only cross attention
        Param *cq = nullptr, *ck = nullptr, *cv = nullptr, *co = nullptr;
        Param *lnc_g = nullptr, *lnc_b = nullptr;
    };

    Param* new_param(const std::string& name, size_t r, size_t c, double stddev) {
        params_.push_back(std::make_unique<Param>(
            name, stddev > 0.0 ? Mat::randn(r, c, stddev, rng_) : Mat(r, c)));
        return params_.back().get();
    }

    LayerParams make_layer(const std::string& prefix, bool decoder) {
        size_t d = static_cast<size_t>(cfg_.d_model);
        size_t f = static_cast<size_t>(cfg_.d_ff);
        double s = 0.02;
        LayerParams lp;
        lp.wq = new_param(prefix + ".wq", d, d, s);
        lp.wk = new_param(prefix + ".wk", d, d, s);
        lp.wv = new_param(prefix + ".wv", d, d, s);
        lp.wo = new_param(prefix + ".wo", d, d, s);
        lp.ln1_g = new_param(prefix + ".ln1.g", 1, d, 0.0);
        lp.ln1_b = new_param(prefix + ".ln1.b", 1, d, 0.0);
        for (size_t c = 0; c < d; ++c) lp.ln1_g->value.at(0, c) = 1.0;
        lp.ffn_w1 = new_param(prefix + ".ffn.w1", d, f, s);
        lp.ffn_b1 = new_param(prefix + ".ffn.b1", 1, f, 0.0);
        lp.ffn_w2 = new_param(prefix + ".ffn.w2", f, d, s);
        lp.ffn_b2 = new_param(prefix + ".ffn.b2", 1, d, 0.0);
        lp.ln2_g = new_param(prefix + ".ln2.g", 1, d, 0.0);
        lp.ln2_b = new_param(prefix + ".ln2.b", 1, d, 0.0);
        for (size_t c = 0; c < d; ++c) lp.ln2_g->value.at(0, c) = 1.0;
        if (decoder) {
            lp.cq = new_param(prefix + ".cq", d, d, s);
            lp.ck = new_param(prefix + ".ck", d, d, s);
            lp.cv = new_param(prefix + ".cv", d, d, s);
            lp.co = new_param(prefix + ".co", d, d, s);
            lp.lnc_g = new_param(prefix + ".lnc.g", 1, d, 0.0);
            lp.lnc_b = new_param(prefix + ".lnc.b", 1, d, 0.0);
            for (size_t c = 0; c < d; ++c) lp.lnc_g->value.at(0, c) = 1.0;
        }
        return lp;
    }

    void init_params() {
        size_t d = static_cast<size_t>(cfg_.d_model);
        size_t v = static_cast<size_t>(cfg_.vocab);
        size_t p = static_cast<size_t>(cfg_.max_positions);
        tok_embed_ = new_param("embed.tok", v, d, 0.02);
        pos_embed_ = new_param("embed.pos", p, d, 0.02);
        for (int i = 0; i < cfg_.n_layers; ++i) {
            enc_layers_.push_back(make_layer("enc." + std::to_string(i), false));
            dec_layers_.push_back(make_layer("dec." + std::to_string(i), true));
        }
        enc_ln_g_ = new_param("enc.ln.g", 1, d, 0.0);
        enc_ln_b_ = new_param("enc.ln.b", 1, d, 0.0);
        dec_ln_g_ = new_param("dec.ln.g", 1, d, 0.0);
        dec_ln_b_ = new_param("dec.ln.b", 1, d, 0.0);
        for (size_t c = 0; c < d; ++c) {
            enc_ln_g_->value.at(0, c) = 1.0;
            dec_ln_g_->value.at(0, c) = 1.0;
        }
        out_w_ = new_param("out.w", d, v, 0.02);
        out_b_ = new_param("out.b", 1, v, 0.0);
    }

    void clamp_positions(std::vector<int>& ids) const {
        if (ids.size() > static_cast<size_t>(cfg_.max_positions))
            ids.resize(static_cast<size_t>(cfg_.max_positions));
    }

    Tape::NodeRef embed_sequence(Tape& tape, const std::vector<int>& ids) const {
        Tape& t = tape;
        Tape::NodeRef tok = t.embed(t.param(*tok_embed_), ids);
        std::vector<int> pos(ids.size());
        for (size_t i = 0; i < ids.size(); ++i) pos[i] = static_cast<int>(i);
        Tape::NodeRef pe = t.embed(t.param(*pos_embed_), pos);
        return t.add(tok, pe);
    }

    // Multi-head attention; kv == q gives self attention. mask may be null.
    Tape::NodeRef attention(Tape& t, Tape::NodeRef q_in, Tape::NodeRef kv_in, Param* wq,
                            Param* wk, Param* wv, Param* wo, const Mat* mask) const {
        size_t d = static_cast<size_t>(cfg_.d_model);
        size_t h = static_cast<size_t>(cfg_.n_heads);
        size_t dh = d / h;
        Tape::NodeRef q = t.matmul(q_in, t.param(*wq));
        Tape::NodeRef k = t.matmul(kv_in, t.param(*wk));
        Tape::NodeRef v = t.matmul(kv_in, t.param(*wv));
        // per-head slices via constant selector matrices would be wasteful;
        // instead run heads over column ranges using split/concat leaves.
        std::vector<Tape::NodeRef> heads;
        for (size_t hi = 0; hi < h; ++hi) {
            Tape::NodeRef qs = slice_cols(t, q, hi * dh, dh);
            Tape::NodeRef ks = slice_cols(t, k, hi * dh, dh);
            Tape::NodeRef vs = slice_cols(t, v, hi * dh, dh);
            Tape::NodeRef scores = t.scale(t.matmul_nt(qs, ks), 1.0 / std::sqrt(double(dh)));
            if (mask) scores = t.add_const(scores, *mask);
            Tape::NodeRef attn = t.softmax_rows(scores);
            heads.push_back(t.matmul(attn, vs));
        }
        Tape::NodeRef ctx = concat_cols(t, heads);
        return t.matmul(ctx, t.param(*wo));
    }

    // Column slice as a differentiable op.
    static Tape::NodeRef slice_cols(Tape& t, Tape::NodeRef a, size_t begin, size_t width) {
        Mat sel(a->val.cols, width);
        for (size_t i = 0; i < width; ++i) sel.at(begin + i, i) = 1.0;
        return t.matmul(a, t.leaf(sel));
    }

    static Tape::NodeRef concat_cols(Tape& t, const std::vector<Tape::NodeRef>& parts) {
        size_t total = 0;
        for (const auto& p : parts) total += p->val.cols;
        Tape::NodeRef acc;
        size_t offset = 0;
        for (const auto& p : parts) {
            Mat expand(p->val.cols, total);
            for (size_t i = 0; i < p->val.cols; ++i) expand.at(i, offset + i) = 1.0;
            Tape::NodeRef widened = t.matmul(p, t.leaf(expand));
            acc = acc ? t.add(acc, widened) : widened;
            offset += p->val.cols;
        }
        return acc;
    }

    Tape::NodeRef ffn(Tape& t, Tape::NodeRef x, const LayerParams& lp) const {
        Tape::NodeRef h = t.relu(t.add_row(t.matmul(x, t.param(*lp.ffn_w1)), t.param(*lp.ffn_b1)));
        return t.add_row(t.matmul(h, t.param(*lp.ffn_w2)), t.param(*lp.ffn_b2));
    }

    Tape::NodeRef run_encoder(Tape& t, const std::vector<int>& src, bool use_dropout) const {
        Tape::NodeRef x = embed_sequence(t, src);
        for (const auto& lp : enc_layers_) {
            Tape::NodeRef normed = t.layer_norm(x, t.param(*lp.ln1_g), t.param(*lp.ln1_b));
            Tape::NodeRef att = attention(t, normed, normed, lp.wq, lp.wk, lp.wv, lp.wo, nullptr);
            if (use_dropout) att = t.dropout(att, cfg_.dropout, rng_);
            x = t.add(x, att);
            Tape::NodeRef normed2 = t.layer_norm(x, t.param(*lp.ln2_g), t.param(*lp.ln2_b));
            Tape::NodeRef f = ffn(t, normed2, lp);
            if (use_dropout) f = t.dropout(f, cfg_.dropout, rng_);
            x = t.add(x, f);
        }
        return t.layer_norm(x, t.param(*enc_ln_g_), t.param(*enc_ln_b_));
    }

    Tape::NodeRef run_decoder(Tape& t, Tape::NodeRef enc, const std::vector<int>& dec_in,
                              bool use_dropout) const {
        size_t n = dec_in.size();
        Mat causal(n, n);
        for (size_t r = 0; r < n; ++r)
            for (size_t c = r + 1; c < n; ++c) causal.at(r, c) = -1e9;
        Tape::NodeRef x = embed_sequence(t, dec_in);
        for (const auto& lp : dec_layers_) {
            Tape::NodeRef normed = t.layer_norm(x, t.param(*lp.ln1_g), t.param(*lp.ln1_b));
            Tape::NodeRef att =
                attention(t, normed, normed, lp.wq, lp.wk, lp.wv, lp.wo, &causal);
            if (use_dropout) att = t.dropout(att, cfg_.dropout, rng_);
            x = t.add(x, att);
            Tape::NodeRef normc = t.layer_norm(x, t.param(*lp.lnc_g), t.param(*lp.lnc_b));
            Tape::NodeRef cross = attention(t, normc, enc, lp.cq, lp.ck, lp.cv, lp.co, nullptr);
            if (use_dropout) cross = t.dropout(cross, cfg_.dropout, rng_);
            x = t.add(x, cross);
            Tape::NodeRef normed2 = t.layer_norm(x, t.param(*lp.ln2_g), t.param(*lp.ln2_b));
            Tape::NodeRef f = ffn(t, normed2, lp);
            if (use_dropout) f = t.dropout(f, cfg_.dropout, rng_);
            x = t.add(x, f);
        }
        x = t.layer_norm(x, t.param(*dec_ln_g_), t.param(*dec_ln_b_));
        Tape::NodeRef logits = t.add_row(t.matmul(x, t.param(*out_w_)), t.param(*out_b_));
        return t.log_softmax_rows(logits);
    }

    ToyModelConfig cfg_;
    mutable std::mt19937_64 rng_;
    bool train_mode_ = false;

    std::vector<std::unique_ptr<Param>> params_;
    Param* tok_embed_ = nullptr;
    Param* pos_embed_ = nullptr;
    std::vector<LayerParams> enc_layers_;
    std::vector<LayerParams> dec_layers_;
    Param* enc_ln_g_ = nullptr;
    Param* enc_ln_b_ = nullptr;
    Param* dec_ln_g_ = nullptr;
    Param* dec_ln_b_ = nullptr;
    Param* out_w_ = nullptr;
    Param* out_b_ = nullptr;
};

// ---------------------------------------------------------------------------
// Checkpoints: directory with params.bin, manifest.json, config.json, vocab.txt
// ---------------------------------------------------------------------------

struct CheckpointInfo {
    std::string model_kind;
    int vocab_size = 0;
    std::string config_hash;
    std::string stage;  // "post_train" | "fine_tune" | "init"
};

inline void save_checkpoint(ToySeq2Seq& model, const Vocabulary& vocab,
                            const std::filesystem::path& dir, const std::string& stage) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    std::string blob;
    for (Param* p : model.parameters()) {
        const char* bytes = reinterpret_cast<const char*>(p->value.data.data());
        blob.append(bytes, p->value.size() * sizeof(double));
    }
    write_file_atomic(dir / "params.bin", blob);

    const ToyModelConfig& c = model.config();
    nlohmann::json cfg;
    cfg["vocab"] = c.vocab;
    cfg["d_model"] = c.d_model;
    cfg["n_layers"] = c.n_layers;
    cfg["n_heads"] = c.n_heads;
    cfg["d_ff"] = c.d_ff;
    cfg["max_positions"] = c.max_positions;
    cfg["max_source_tokens"] = c.max_source_tokens;
    cfg["dropout"] = c.dropout;
    write_file_atomic(dir / "config.json", cfg.dump(2) + "\n");

    nlohmann::json manifest;
    manifest["model_kind"] = "toy_seq2seq";
    manifest["vocab_size"] = c.vocab;
    manifest["config_hash"] = content_hash(c.hash_key());
    manifest["stage"] = stage;
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");

    vocab.save(dir / "vocab.txt");
}

inline CheckpointInfo read_checkpoint_info(const std::filesystem::path& dir) {
    nlohmann::json manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
    CheckpointInfo info;
    info.model_kind = manifest.value("model_kind", "");
    info.vocab_size = manifest.value("vocab_size", 0);
    info.config_hash = manifest.value("config_hash", "");
    info.stage = manifest.value("stage", "");
    return info;
}

inline std::unique_ptr<ToySeq2Seq> load_checkpoint(const std::filesystem::path& dir,
                                                   Vocabulary* vocab_out = nullptr) {
    CheckpointInfo info = read_checkpoint_info(dir);
    if (info.model_kind != "toy_seq2seq")
        throw Error("checkpoint: unsupported model kind: " + info.model_kind);
    nlohmann::json cfg = nlohmann::json::parse(read_file(dir / "config.json"));
    ToyModelConfig c;
    c.vocab = cfg.at("vocab").get<int>();
    c.d_model = cfg.at("d_model").get<int>();
    c.n_layers = cfg.at("n_layers").get<int>();
    c.n_heads = cfg.at("n_heads").get<int>();
    c.d_ff = cfg.at("d_ff").get<int>();
    c.max_positions = cfg.at("max_positions").get<int>();
    c.max_source_tokens = cfg.at("max_source_tokens").get<int>();
    c.dropout = cfg.value("dropout", 0.1);
    auto model = std::make_unique<ToySeq2Seq>(c);

    std::string blob = read_file(dir / "params.bin");
    size_t offset = 0;
    for (Param* p : model->parameters()) {
        size_t bytes = p->value.size() * sizeof(double);
        if (offset + bytes > blob.size()) throw Error("checkpoint: parameter blob too short");
        std::memcpy(p->value.data.data(), blob.data() + offset, bytes);
        offset += bytes;
    }
    if (offset != blob.size()) throw Error("checkpoint: parameter blob size mismatch");

    if (vocab_out) *vocab_out = Vocabulary::load(dir / "vocab.txt");
    return model;
}

}  // namespace dialsum
