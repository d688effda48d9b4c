#pragma once

#include <ctime>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dialsum/beam.hpp"
#include "dialsum/io.hpp"
#include "dialsum/trainer.hpp"

namespace dialsum {

// Flat "[section]\nkey = value" config file; keys become "section.key".
// Lines starting with '#' and blank lines are ignored.
class KvConfig {
public:
    KvConfig() = default;

    static KvConfig parse(std::string_view text) {
        KvConfig cfg;
        std::string section;
        size_t line_no = 0;
        for (const std::string& raw : split_lines(text)) {
            ++line_no;
            std::string_view line = trim(raw);
            if (line.empty() || line.front() == '#') continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw Error("config line " + std::to_string(line_no) + ": unterminated section");
                section = std::string(trim(line.substr(1, line.size() - 2)));
                continue;
            }
            size_t eq = line.find('=');
            if (eq == std::string_view::npos)
                throw Error("config line " + std::to_string(line_no) + ": expected key = value");
            std::string key = std::string(trim(line.substr(0, eq)));
            if (!section.empty()) key = section + "." + key;
            cfg.values_[key] = std::string(trim(line.substr(eq + 1)));
        }
        return cfg;
    }

    static KvConfig load(const std::filesystem::path& path) { return parse(read_file(path)); }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get(const std::string& key, const std::string& fallback = "") const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            return std::stod(it->second);
        } catch (...) {
            throw Error("config: bad number for " + key + ": " + it->second);
        }
    }

    int get_int(const std::string& key, int fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            return std::stoi(it->second);
        } catch (...) {
            throw Error("config: bad integer for " + key + ": " + it->second);
        }
    }

    std::vector<uint64_t> get_seed_list(const std::string& key,
                                        std::vector<uint64_t> fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<uint64_t> out;
        std::string cur;
        for (char c : it->second + ",") {
            if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
                if (!cur.empty()) out.push_back(std::stoull(cur));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (out.empty()) throw Error("config: empty seed list for " + key);
        return out;
    }

    // Canonical dump (sorted keys) used for config hashing.
    std::string canonical() const {
        std::string out;
        for (const auto& [k, v] : values_) {
            out += k;
            out += '=';
            out += v;
            out += '\n';
        }
        return out;
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

private:
    std::map<std::string, std::string> values_;
};

inline TrainConfig train_config_from(const KvConfig& cfg) {
    TrainConfig tc;
    tc.learning_rate = cfg.get_double("trainer.learning_rate", tc.learning_rate);
    tc.weight_decay = cfg.get_double("trainer.weight_decay", tc.weight_decay);
    tc.warmup_steps = cfg.get_int("trainer.warmup_steps", tc.warmup_steps);
    tc.dropout = cfg.get_double("trainer.dropout", tc.dropout);
    tc.patience = cfg.get_int("trainer.patience", tc.patience);
    tc.max_epochs = cfg.get_int("trainer.max_epochs", tc.max_epochs);
    tc.max_source_tokens = cfg.get_int("trainer.max_source_tokens", tc.max_source_tokens);
    tc.batch_size = cfg.get_int("trainer.batch_size", tc.batch_size);
    tc.seeds = cfg.get_seed_list("trainer.seeds", tc.seeds);
    return tc;
}

inline GenerationConfig generation_config_from(const KvConfig& cfg) {
    GenerationConfig gc;
    gc.beam_size = cfg.get_int("generation.beam_size", gc.beam_size);
    gc.length_penalty = cfg.get_double("generation.length_penalty", gc.length_penalty);
    gc.no_repeat_ngram = cfg.get_int("generation.no_repeat_ngram", gc.no_repeat_ngram);
    gc.min_len = cfg.get_int("generation.min_len", gc.min_len);
    gc.max_len = cfg.get_int("generation.max_len", gc.max_len);
    return gc;
}

inline ToyModelConfig model_config_from(const KvConfig& cfg) {
    ToyModelConfig mc;
    mc.d_model = cfg.get_int("model.d_model", mc.d_model);
    mc.n_layers = cfg.get_int("model.n_layers", mc.n_layers);
    mc.n_heads = cfg.get_int("model.n_heads", mc.n_heads);
    mc.d_ff = cfg.get_int("model.d_ff", mc.d_ff);
    mc.max_positions = cfg.get_int("model.max_positions", mc.max_positions);
    mc.dropout = cfg.get_double("model.dropout", mc.dropout);
    return mc;
}

// Per-run manifest: config hash plus content hashes of every input file.
// Identical config + inputs => identical manifest minus the timestamp.
struct CliRunManifest {
    std::string command;
    std::string config_hash;
    std::map<std::string, std::string> input_hashes;
    std::vector<std::string> outputs;

    void add_input(const std::filesystem::path& path) {
        input_hashes[path.string()] = file_hash(path);
    }

    void save(const std::filesystem::path& path, bool with_timestamp = true) const {
        nlohmann::json j;
        j["command"] = command;
        j["config_hash"] = config_hash;
        j["inputs"] = input_hashes;
        j["outputs"] = outputs;
        if (with_timestamp) j["timestamp"] = static_cast<int64_t>(::time(nullptr));
        write_file_atomic(path, j.dump(2) + "\n");
    }
};

}  // namespace dialsum
