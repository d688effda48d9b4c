// Command-line front end: dataset conversion, pseudo-paraphrase construction,
// two-stage training, decoding, scoring, and agreement math.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dialsum/config.hpp"
#include "dialsum/eval.hpp"
#include "dialsum/pipeline.hpp"
#include "dialsum/toy_corpus.hpp"
#include "dialsum/trainer.hpp"

namespace fs = std::filesystem;
using namespace dialsum;

namespace {

struct CommonArgs {
    std::string config_path;
    size_t workers = 1;
};

KvConfig load_cfg(const CommonArgs& common) {
    return common.config_path.empty() ? KvConfig{} : KvConfig::load(common.config_path);
}

std::vector<Sample> load_samples_arg(const std::string& path, const std::string& format) {
    return load_any(path, format == "auto" ? "" : format);
}

AnnotateOptions annotate_options(const std::string& backend, size_t workers) {
    AnnotateOptions opts;
    opts.backend = backend == "external" ? AnnotateBackend::external : AnnotateBackend::fallback;
    opts.workers = std::max<size_t>(1, workers);
    return opts;
}

void write_run_manifest(const std::string& command, const KvConfig& effective,
                        const std::vector<std::string>& inputs,
                        const std::vector<std::string>& outputs, const fs::path& path) {
    CliRunManifest m;
    m.command = command;
    m.config_hash = content_hash(effective.canonical());
    for (const auto& in : inputs) m.add_input(in);
    m.outputs = outputs;
    m.save(path);
}

// ---------------------------------------------------------------------------

int cmd_convert(const std::string& in, const std::string& format, const std::string& out,
                const CommonArgs&) {
    auto samples = load_samples_arg(in, format);
    save_canonical(samples, out);
    KvConfig eff;
    eff.set("convert.format", format);
    write_run_manifest("convert", eff, {in}, {out}, out + ".manifest.json");
    std::printf("wrote %zu records to %s\n", samples.size(), out.c_str());
    return 0;
}

int cmd_stats(const std::string& in, const std::string& format, const std::string& ref_mode,
              const std::string& manifest, const CommonArgs&) {
    auto samples = load_samples_arg(in, format);
    CorpusStats st = compute_stats(
        samples, ref_mode == "first" ? ReferenceMode::first : ReferenceMode::all);
    std::printf("%-10s %12s %10s %10s %8s\n", "split", "n", "IW", "OW", "CR");
    std::printf("%-10s %12zu %10.2f %10.2f %8.4f\n", fs::path(in).stem().string().c_str(),
                st.n_samples, st.iw, st.ow, st.cr);
    if (!manifest.empty()) {
        KvConfig eff;
        eff.set("stats.reference_mode", ref_mode);
        write_run_manifest("stats", eff, {in}, {}, manifest);
    }
    return 0;
}

int cmd_build_data(const std::string& in, const std::string& split, const std::string& format,
                   const std::string& variant, const std::string& out,
                   const std::string& policy_name, int const_len, int random_lo, int random_hi,
                   const std::string& backend, const std::string& vocab_path, uint64_t seed,
                   const CommonArgs& common) {
    std::string input = in;
    if (fs::is_directory(in)) {
        if (split.empty()) throw Error("build-data: --split is required when --in is a directory");
        input = resolve_split_path(in, split).string();
    }
    auto samples = load_samples_arg(input, format);
    Variant v = parse_variant(variant);
    AnnotateOptions aopts = annotate_options(backend, common.workers);
    std::vector<PseudoPair> pairs = build_variant(v, samples, aopts);

    // dataset-level prefix constants may come from the config file
    KvConfig cfg = load_cfg(common);
    int eff_const = cfg.get_int("dataset.prefix_const", const_len);
    int eff_lo = cfg.get_int("dataset.random_lo", random_lo);
    int eff_hi = cfg.get_int("dataset.random_hi", random_hi);
    std::string eff_policy = policy_name;
    if (policy_name == "ling") eff_policy = "ling-" + cfg.get("dataset.ling_feature", "noun");
    PrefixPolicy policy = parse_prefix_policy(eff_policy, eff_const, eff_lo, eff_hi);
    materialize_prefixes(pairs, policy, aopts, seed);
    save_pairs(pairs, out);

    if (variant_is_sentence_level(v)) {
        std::set<std::string> contributed;
        for (const auto& p : pairs) contributed.insert(p.origin_id);
        size_t empty_samples = samples.size() - contributed.size();
        if (empty_samples > 0)
            std::fprintf(stderr, "note: %zu sample(s) contributed zero pairs (all sentences filtered)\n",
                         empty_samples);
    }

    std::string vocab_out;
    if (vocab_path.empty()) {
        std::vector<std::string> texts;
        for (const auto& p : pairs) {
            texts.push_back(p.source);
            texts.push_back(p.target);
        }
        Vocabulary::fit(texts).save(out + ".vocab");
        vocab_out = out + ".vocab";
    }

    KvConfig eff;
    eff.set("build.variant", variant);
    eff.set("build.policy", prefix_policy_name(policy));
    eff.set("build.backend", backend);
    eff.set("build.split", split);
    eff.set("build.seed", std::to_string(seed));
    std::vector<std::string> outputs = {out};
    if (!vocab_out.empty()) outputs.push_back(vocab_out);
    write_run_manifest("build-data", eff, {input}, outputs, out + ".manifest.json");

    if (policy.kind != PrefixPolicy::Kind::WO && !pairs.empty()) {
        PrefixStats ps = prefix_stats_for(pairs);
        std::printf("prefix tokens: %.2f +- %.2f over %zu pairs\n", ps.mean, ps.stddev, ps.n);
    }
    std::printf("wrote %zu pairs to %s\n", pairs.size(), out.c_str());
    return 0;
}

ToyModelConfig model_config_for(const KvConfig& cfg, int vocab_size, int max_source_tokens,
                                uint64_t seed) {
    ToyModelConfig mc = model_config_from(cfg);
    mc.vocab = vocab_size;
    mc.max_source_tokens = max_source_tokens;
    mc.seed = seed;
    return mc;
}

int cmd_post_train(const std::string& data, const std::string& val, const std::string& vocab_path,
                   const std::string& init_ckpt, const std::string& out_dir,
                   const std::string& policy_label, const CommonArgs& common) {
    KvConfig cfg = load_cfg(common);
    TrainConfig tc = train_config_from(cfg);
    GenerationConfig gc = generation_config_from(cfg);

    auto train_pairs = load_pairs(data);
    std::vector<PseudoPair> val_pairs = val.empty() ? std::vector<PseudoPair>{} : load_pairs(val);

    Vocabulary vocab;
    std::unique_ptr<ToySeq2Seq> model;
    if (!init_ckpt.empty()) {
        model = load_checkpoint(init_ckpt, &vocab);
    } else {
        if (vocab_path.empty()) throw Error("post-train: --vocab or --init is required");
        vocab = Vocabulary::load(vocab_path);
        model = std::make_unique<ToySeq2Seq>(model_config_for(
            cfg, static_cast<int>(vocab.size()), tc.max_source_tokens, tc.seeds.front()));
    }

    TrainResult result = post_train(*model, vocab, train_pairs, val_pairs, tc, gc, out_dir,
                                    policy_label.empty() ? "stored" : policy_label);
    KvConfig eff = cfg;
    eff.set("run.stage", "post_train");
    eff.set("run.data", data);
    std::vector<std::string> inputs = {data};
    if (!val.empty()) inputs.push_back(val);
    write_run_manifest("post-train", eff, inputs, {result.checkpoint_dir.string()},
                       fs::path(out_dir) / "run_manifest.json");
    std::printf("post-train done: chosen epoch %d, best val R2 %.4f, checkpoint %s\n",
                result.manifest.chosen_epoch,
                result.manifest.chosen_epoch > 0
                    ? result.manifest.val_rouge2[static_cast<size_t>(result.manifest.chosen_epoch - 1)]
                    : 0.0,
                result.checkpoint_dir.c_str());
    return result.manifest.failed ? 2 : 0;
}

int cmd_fine_tune(const std::string& data, const std::string& val, const std::string& format,
                  const std::string& vocab_path, const std::string& init_ckpt,
                  const std::string& out_dir, const CommonArgs& common) {
    KvConfig cfg = load_cfg(common);
    TrainConfig tc = train_config_from(cfg);
    GenerationConfig gc = generation_config_from(cfg);

    auto train_samples = load_samples_arg(data, format);
    std::vector<Sample> val_samples =
        val.empty() ? std::vector<Sample>{} : load_samples_arg(val, format);

    Vocabulary vocab;
    std::unique_ptr<ToySeq2Seq> model;
    if (!init_ckpt.empty()) {
        model = load_checkpoint(init_ckpt, &vocab);
    } else {
        if (vocab_path.empty()) throw Error("fine-tune: --vocab or --init is required");
        vocab = Vocabulary::load(vocab_path);
        model = std::make_unique<ToySeq2Seq>(model_config_for(
            cfg, static_cast<int>(vocab.size()), tc.max_source_tokens, tc.seeds.front()));
    }

    TrainResult result = fine_tune(*model, vocab, train_samples, val_samples, tc, gc, out_dir);
    KvConfig eff = cfg;
    eff.set("run.stage", "fine_tune");
    eff.set("run.data", data);
    std::vector<std::string> inputs = {data};
    if (!val.empty()) inputs.push_back(val);
    write_run_manifest("fine-tune", eff, inputs, {result.checkpoint_dir.string()},
                       fs::path(out_dir) / "run_manifest.json");
    std::printf("fine-tune done: chosen epoch %d, checkpoint %s\n", result.manifest.chosen_epoch,
                result.checkpoint_dir.c_str());
    return result.manifest.failed ? 2 : 0;
}

int cmd_generate(const std::string& ckpt, const std::string& in, const std::string& format,
                 const std::string& out, GenerationConfig gc, int forced_tokens,
                 const CommonArgs& common) {
    Vocabulary vocab;
    auto model = load_checkpoint(ckpt, &vocab);
    auto samples = load_samples_arg(in, format);
    std::vector<std::string> decoded(samples.size());
    parallel_for(samples.size(), common.workers, [&](size_t i) {
        const Sample& s = samples[i];
        GenerationConfig g = gc;
        if (forced_tokens > 0) {
            auto ref_ids = vocab.encode(s.references.front());
            int n = std::min<int>(forced_tokens, static_cast<int>(ref_ids.size()) - 1);
            if (n > 0) g.forced_prefix.assign(ref_ids.begin(), ref_ids.begin() + n);
        }
        BeamResult r = beam_search(*model, vocab.encode(serialize_dialogue(s.dialogue)), g);
        decoded[i] = vocab.decode(r.ids);
    });
    std::string buffer;
    for (const auto& line : decoded) {
        buffer += line;
        buffer += '\n';
    }
    write_file_atomic(out, buffer);
    KvConfig eff;
    eff.set("generate.beam_size", std::to_string(gc.beam_size));
    eff.set("generate.max_len", std::to_string(gc.max_len));
    write_run_manifest("generate", eff, {in}, {out}, out + ".manifest.json");
    std::printf("wrote %zu candidates to %s\n", samples.size(), out.c_str());
    return 0;
}

int cmd_evaluate(const std::string& candidates_path, const std::string& refs_path,
                 const std::string& format, const std::string& baseline_path,
                 const std::string& cr_edges_arg, bool no_stem, bool keep_case,
                 const std::string& per_sample_out, const CommonArgs&) {
    auto samples = load_samples_arg(refs_path, format);
    std::vector<std::string> candidates;
    for (auto& line : read_lines(candidates_path)) candidates.push_back(line);
    while (!candidates.empty() && candidates.back().empty()) candidates.pop_back();

    NormalizeOpts opts;
    opts.stem = !no_stem;
    opts.lowercase = !keep_case;
    EvalReport report = evaluate(candidates, samples, opts);

    auto pct = [](double x) { return 100.0 * x; };
    std::printf("%-8s %10s %10s %10s\n", "metric", "P", "R", "F1");
    std::printf("%-8s %10.2f %10.2f %10.2f\n", "rouge-1", pct(report.corpus_mean.r1.precision),
                pct(report.corpus_mean.r1.recall), pct(report.corpus_mean.r1.f1));
    std::printf("%-8s %10.2f %10.2f %10.2f\n", "rouge-2", pct(report.corpus_mean.r2.precision),
                pct(report.corpus_mean.r2.recall), pct(report.corpus_mean.r2.f1));
    std::printf("%-8s %10.2f %10.2f %10.2f\n", "rouge-L", pct(report.corpus_mean.rl.precision),
                pct(report.corpus_mean.rl.recall), pct(report.corpus_mean.rl.f1));

    if (!baseline_path.empty()) {
        std::vector<std::string> base;
        for (auto& line : read_lines(baseline_path)) base.push_back(line);
        while (!base.empty() && base.back().empty()) base.pop_back();
        EvalReport base_report = evaluate(base, samples, opts);
        std::vector<double> ours, theirs;
        for (size_t i = 0; i < report.per_sample.size(); ++i) {
            ours.push_back(report.per_sample[i].r2.f1);
            theirs.push_back(base_report.per_sample[i].r2.f1);
        }
        double p = paired_ttest(ours, theirs);
        report.p_value_r2_vs_baseline = p;
        std::printf("paired t-test vs baseline (ROUGE-2 F1): p = %.6f%s\n", p,
                    p < 0.05 ? " (significant at 0.05)" : "");
    }

    if (!cr_edges_arg.empty()) {
        std::vector<double> edges;
        if (cr_edges_arg != "auto") {
            std::string cur;
            for (char c : cr_edges_arg + ",") {
                if (c == ',') {
                    if (!trim(cur).empty()) edges.push_back(std::stod(cur));
                    cur.clear();
                } else {
                    cur += c;
                }
            }
        }
        if (edges.empty()) edges = decile_edges(report.sample_cr);
        std::printf("%-24s %8s %10s\n", "CR bucket", "n", "R2 F1");
        for (const auto& b : cr_buckets(report, edges))
            std::printf("[%9.4f, %9.4f) %8zu %10.2f\n",
                        b.lo == std::numeric_limits<double>::lowest() ? 0.0 : b.lo,
                        b.hi == std::numeric_limits<double>::max() ? 1e9 : b.hi, b.n,
                        pct(b.mean_r2_f1));
    }

    if (!per_sample_out.empty()) {
        std::string buf;
        for (size_t i = 0; i < report.per_sample.size(); ++i) {
            nlohmann::json j;
            j["index"] = i;
            j["id"] = samples[i].dialogue.id;
            j["r1_f1"] = report.per_sample[i].r1.f1;
            j["r2_f1"] = report.per_sample[i].r2.f1;
            j["rl_f1"] = report.per_sample[i].rl.f1;
            j["cr"] = report.sample_cr[i];
            buf += j.dump();
            buf += '\n';
        }
        write_file_atomic(per_sample_out, buf);
        KvConfig eff;
        eff.set("evaluate.stem", no_stem ? "off" : "on");
        std::vector<std::string> inputs = {candidates_path, refs_path};
        if (!baseline_path.empty()) inputs.push_back(baseline_path);
        write_run_manifest("evaluate", eff, inputs, {per_sample_out},
                           per_sample_out + ".manifest.json");
    }
    return 0;
}

int cmd_kappa(const std::string& records_path, const std::string& manifest,
              const CommonArgs&) {
    auto records = load_human_records(records_path);
    auto score_cat = [](const HumanRecord& r) -> size_t {
        return r.score == -2 ? 0 : (r.score == 0 ? 1 : 2);
    };
    auto flag_cat = [](bool f) -> size_t { return f ? 1 : 0; };
    std::printf("%-10s %8s\n", "labels", "kappa");
    std::printf("%-10s %8.4f\n", "overall", fleiss_kappa_records(records, 3, score_cat));
    std::printf("%-10s %8.4f\n", "mis",
                fleiss_kappa_records(records, 2, [&](const HumanRecord& r) { return flag_cat(r.mis); }));
    std::printf("%-10s %8.4f\n", "red",
                fleiss_kappa_records(records, 2, [&](const HumanRecord& r) { return flag_cat(r.red); }));
    std::printf("%-10s %8.4f\n", "cor",
                fleiss_kappa_records(records, 2, [&](const HumanRecord& r) { return flag_cat(r.cor); }));
    std::printf("%-10s %8.4f\n", "rea",
                fleiss_kappa_records(records, 2, [&](const HumanRecord& r) { return flag_cat(r.rea); }));
    std::printf("%-10s %8.4f\n", "mis|red",
                fleiss_kappa_records(records, 2, [&](const HumanRecord& r) {
                    return flag_cat(merge_error_flags(r).first);
                }));
    std::printf("%-10s %8.4f\n", "cor|rea",
                fleiss_kappa_records(records, 2, [&](const HumanRecord& r) {
                    return flag_cat(merge_error_flags(r).second);
                }));
    if (!manifest.empty()) {
        KvConfig eff;
        write_run_manifest("kappa", eff, {records_path}, {}, manifest);
    }
    return 0;
}

int cmd_oracle_extract(const std::string& in, const std::string& format, const std::string& out,
                       bool modified, const CommonArgs& common) {
    auto samples = load_samples_arg(in, format);
    std::vector<std::string> lines(samples.size());
    parallel_for(samples.size(), common.workers, [&](size_t i) {
        ExtractionResult ext =
            oracle_extract(samples[i].dialogue, samples[i].references.front(), modified);
        nlohmann::json j;
        j["id"] = samples[i].dialogue.id;
        j["indices"] = ext.indices;
        j["score"] = ext.score;
        lines[i] = j.dump();
    });
    std::string buf;
    for (auto& l : lines) {
        buf += l;
        buf += '\n';
    }
    write_file_atomic(out, buf);
    KvConfig eff;
    eff.set("extract.modified", modified ? "true" : "false");
    write_run_manifest("oracle-extract", eff, {in}, {out}, out + ".manifest.json");
    std::printf("wrote %zu extractions to %s\n", samples.size(), out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dialogue-to-narrative summarization pipeline"};
    app.require_subcommand(1);
    CommonArgs common;

    // convert
    std::string c_in, c_format = "auto", c_out;
    auto* convert = app.add_subcommand("convert", "convert a source corpus to canonical records");
    convert->add_option("--in", c_in)->required();
    convert->add_option("--format", c_format)->check(CLI::IsMember({"auto", "samsum_json", "dialsumm_jsonl"}));
    convert->add_option("--out", c_out)->required();

    // stats
    std::string s_in, s_format = "auto", s_mode = "all", s_manifest;
    auto* stats = app.add_subcommand("stats", "corpus statistics (n, IW, OW, CR)");
    stats->add_option("--in", s_in)->required();
    stats->add_option("--format", s_format);
    stats->add_option("--reference-mode", s_mode)->check(CLI::IsMember({"first", "all"}));
    stats->add_option("--manifest", s_manifest);

    // build-data
    std::string b_in, b_split, b_format = "auto", b_variant = "dialsent", b_out, b_policy = "wo";
    std::string b_backend = "fallback", b_vocab;
    int b_const = 2, b_lo = 1, b_hi = 3;
    uint64_t b_seed = 13;
    auto* build = app.add_subcommand("build-data", "build pseudo-paraphrase pairs");
    build->add_option("--in", b_in)->required();
    build->add_option("--split", b_split, "split name when --in is a dataset directory");
    build->add_option("--format", b_format);
    build->add_option("--variant", b_variant)
        ->check(CLI::IsMember({"dsum", "dialsent", "dialindirect", "extsum", "extsumm", "extsent",
                               "extsentm"}));
    build->add_option("--out", b_out)->required();
    build->add_option("--prefix-policy", b_policy)
        ->check(CLI::IsMember({"wo", "const", "random", "ling", "ling-noun", "ling-verb", "ling-root"}));
    build->add_option("--const-len", b_const);
    build->add_option("--random-lo", b_lo);
    build->add_option("--random-hi", b_hi);
    build->add_option("--backend", b_backend)->check(CLI::IsMember({"fallback", "external"}));
    build->add_option("--vocab", b_vocab, "existing vocab; skip the sidecar fit");
    build->add_option("--seed", b_seed);

    // post-train
    std::string pt_data, pt_val, pt_vocab, pt_init, pt_out, pt_policy;
    auto* ptrain = app.add_subcommand("post-train", "prefix-guided post-training on pairs");
    ptrain->add_option("--data", pt_data)->required();
    ptrain->add_option("--val", pt_val);
    ptrain->add_option("--vocab", pt_vocab);
    ptrain->add_option("--init", pt_init, "start from a checkpoint directory");
    ptrain->add_option("--out-dir", pt_out)->required();
    ptrain->add_option("--policy", pt_policy, "policy label recorded in the manifest");

    // fine-tune
    std::string ft_data, ft_val, ft_format = "auto", ft_vocab, ft_init, ft_out;
    auto* ftune = app.add_subcommand("fine-tune", "summarization fine-tuning on DSum samples");
    ftune->add_option("--data", ft_data)->required();
    ftune->add_option("--val", ft_val);
    ftune->add_option("--format", ft_format);
    ftune->add_option("--vocab", ft_vocab);
    ftune->add_option("--init", ft_init);
    ftune->add_option("--out-dir", ft_out)->required();

    // generate
    std::string g_ckpt, g_in, g_format = "auto", g_out;
    GenerationConfig g_cfg;
    int g_forced = 0;
    auto* gen = app.add_subcommand("generate", "beam-search decode a corpus");
    gen->add_option("--checkpoint", g_ckpt)->required();
    gen->add_option("--in", g_in)->required();
    gen->add_option("--format", g_format);
    gen->add_option("--out", g_out)->required();
    gen->add_option("--beam-size", g_cfg.beam_size);
    gen->add_option("--length-penalty", g_cfg.length_penalty);
    gen->add_option("--no-repeat-ngram", g_cfg.no_repeat_ngram);
    gen->add_option("--min-len", g_cfg.min_len);
    gen->add_option("--max-len", g_cfg.max_len);
    gen->add_option("--forced-prefix-tokens", g_forced,
                    "force the first N reference tokens (validation protocol)");

    // evaluate
    std::string e_cand, e_refs, e_format = "auto", e_base, e_edges, e_per_sample;
    bool e_no_stem = false, e_keep_case = false;
    auto* eval_cmd = app.add_subcommand("evaluate", "ROUGE scoring with optional t-test");
    eval_cmd->add_option("--candidates", e_cand)->required();
    eval_cmd->add_option("--refs", e_refs)->required();
    eval_cmd->add_option("--format", e_format);
    eval_cmd->add_option("--baseline", e_base, "second candidate file for the t-test column");
    eval_cmd->add_option("--cr-edges", e_edges, "comma-separated CR bucket edges; 'auto' = deciles");
    eval_cmd->add_flag("--no-stem", e_no_stem);
    eval_cmd->add_flag("--keep-case", e_keep_case);
    eval_cmd->add_option("--per-sample", e_per_sample, "write per-sample score records here");

    // kappa
    std::string k_records, k_manifest;
    auto* kappa = app.add_subcommand("kappa", "inter-annotator agreement from human records");
    kappa->add_option("--records", k_records)->required();
    kappa->add_option("--manifest", k_manifest);

    // oracle-extract
    std::string o_in, o_format = "auto", o_out;
    bool o_modified = false;
    auto* oracle = app.add_subcommand("oracle-extract", "greedy ROUGE turn extraction");
    oracle->add_option("--in", o_in)->required();
    oracle->add_option("--format", o_format);
    oracle->add_option("--out", o_out)->required();
    oracle->add_flag("--modified", o_modified, "close the selection to a contiguous range");

    for (auto* sub : {convert, stats, build, ptrain, ftune, gen, eval_cmd, kappa, oracle}) {
        sub->add_option("--config", common.config_path, "flat key-value config file");
        sub->add_option("--workers", common.workers, "worker pool cap");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (convert->parsed()) return cmd_convert(c_in, c_format, c_out, common);
        if (stats->parsed()) return cmd_stats(s_in, s_format, s_mode, s_manifest, common);
        if (build->parsed())
            return cmd_build_data(b_in, b_split, b_format, b_variant, b_out, b_policy, b_const,
                                  b_lo, b_hi, b_backend, b_vocab, b_seed, common);
        if (ptrain->parsed())
            return cmd_post_train(pt_data, pt_val, pt_vocab, pt_init, pt_out, pt_policy, common);
        if (ftune->parsed())
            return cmd_fine_tune(ft_data, ft_val, ft_format, ft_vocab, ft_init, ft_out, common);
        if (gen->parsed())
            return cmd_generate(g_ckpt, g_in, g_format, g_out, g_cfg, g_forced, common);
        if (eval_cmd->parsed())
            return cmd_evaluate(e_cand, e_refs, e_format, e_base, e_edges, e_no_stem, e_keep_case,
                                e_per_sample, common);
        if (kappa->parsed()) return cmd_kappa(k_records, k_manifest, common);
        if (oracle->parsed()) return cmd_oracle_extract(o_in, o_format, o_out, o_modified, common);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
