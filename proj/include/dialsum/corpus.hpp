#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dialsum/io.hpp"

namespace dialsum {

struct Utterance {
    std::string speaker;  // non-empty, no line breaks
    std::string text;     // may be empty
};

struct Dialogue {
    std::string id;
    std::vector<Utterance> turns;  // length >= 1, source order
};

struct Sample {
    Dialogue dialogue;
    std::vector<std::string> references;  // length >= 1, all non-empty
};

struct CorpusStats {
    size_t n_samples = 0;
    double iw = 0.0;  // mean input word count
    double ow = 0.0;  // mean output word count
    double cr = 0.0;  // ow / iw
};

enum class CorpusFormat { samsum_json, dialsumm_jsonl };
enum class ReferenceMode { first, all };

inline CorpusFormat parse_corpus_format(std::string_view s) {
    if (s == "samsum_json" || s == "samsum") return CorpusFormat::samsum_json;
    if (s == "dialsumm_jsonl" || s == "dialsumm") return CorpusFormat::dialsumm_jsonl;
    throw Error("unknown corpus format: " + std::string(s));
}

// "r_1: u_1\nr_2: u_2 ..." -- one turn per line, joined by a single newline.
inline std::string serialize_dialogue(const Dialogue& d) {
    std::string out;
    for (size_t i = 0; i < d.turns.size(); ++i) {
        if (i > 0) out += '\n';
        out += d.turns[i].speaker;
        out += ": ";
        out += d.turns[i].text;
    }
    return out;
}

namespace corpus_detail {

inline void validate_utterance(const Utterance& u, const std::string& where) {
    if (u.speaker.empty()) throw Error(where + ": empty speaker");
    if (u.speaker.find('\n') != std::string::npos || u.speaker.find('\r') != std::string::npos)
        throw Error(where + ": speaker contains line break");
}

// Splits a raw dialogue string ("Speaker: text" lines, \r\n or \n separated)
// into turns. Lines without a speaker prefix continue the previous turn.
inline std::vector<Utterance> parse_turns(std::string_view dialogue, const std::string& where) {
    std::vector<Utterance> turns;
    for (const std::string& raw : split_lines(dialogue)) {
        std::string_view line = trim(raw);
        if (line.empty()) continue;
        size_t colon = line.find(':');
        std::string_view speaker = colon == std::string_view::npos
                                       ? std::string_view{}
                                       : trim(line.substr(0, colon));
        if (speaker.empty()) {
            if (turns.empty()) throw Error(where + ": first line has no speaker");
            if (!turns.back().text.empty()) turns.back().text += ' ';
            turns.back().text += std::string(line);
            continue;
        }
        Utterance u;
        u.speaker = std::string(speaker);
        u.text = std::string(trim(line.substr(colon + 1)));
        turns.push_back(std::move(u));
    }
    if (turns.empty()) throw Error(where + ": dialogue has no turns");
    for (const auto& u : turns) validate_utterance(u, where);
    return turns;
}

inline std::string require_string(const nlohmann::json& rec, const char* field,
                                  const std::string& where) {
    if (!rec.contains(field))
        throw Error(where + ": missing field \"" + field + "\"");
    if (!rec[field].is_string())
        throw Error(where + ": field \"" + field + "\" is not a string");
    return rec[field].get<std::string>();
}

inline void validate_references(const std::vector<std::string>& refs, const std::string& where) {
    if (refs.empty()) throw Error(where + ": no references");
    for (size_t i = 0; i < refs.size(); ++i)
        if (trim(refs[i]).empty())
            throw Error(where + ": empty reference at index " + std::to_string(i));
}

}  // namespace corpus_detail

inline std::vector<Sample> load_split(const std::filesystem::path& path, CorpusFormat format) {
    using namespace corpus_detail;
    std::vector<Sample> samples;
    std::string content = read_file(path);
    if (trim(content).empty()) throw Error("empty file: " + path.string());

    if (format == CorpusFormat::samsum_json) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(content);
        } catch (const nlohmann::json::exception& e) {
            throw Error(path.string() + ": invalid JSON: " + e.what());
        }
        if (!doc.is_array()) throw Error(path.string() + ": expected a JSON array");
        size_t idx = 0;
        for (const auto& rec : doc) {
            std::string where = "record " + std::to_string(idx);
            Sample s;
            s.dialogue.id = require_string(rec, "id", where);
            s.dialogue.turns = parse_turns(require_string(rec, "dialogue", where), where);
            s.references = {require_string(rec, "summary", where)};
            validate_references(s.references, where);
            samples.push_back(std::move(s));
            ++idx;
        }
    } else {
        size_t idx = 0;
        for (const std::string& line : split_lines(content)) {
            if (trim(line).empty()) continue;
            std::string where = "record " + std::to_string(idx);
            nlohmann::json rec;
            try {
                rec = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw Error(where + ": invalid JSON: " + e.what());
            }
            Sample s;
            s.dialogue.id = require_string(rec, "fname", where);
            s.dialogue.turns = parse_turns(require_string(rec, "dialogue", where), where);
            // test splits ship either summary/summary2/summary3 or summary1..3
            const char* first = rec.contains("summary") ? "summary" : "summary1";
            s.references = {require_string(rec, first, where)};
            for (const char* extra : {"summary2", "summary3"})
                if (rec.contains(extra)) s.references.push_back(require_string(rec, extra, where));
            validate_references(s.references, where);
            samples.push_back(std::move(s));
            ++idx;
        }
    }
    if (samples.empty()) throw Error("empty file: " + path.string());
    return samples;
}

// Canonical line-delimited records: {id, turns:[{speaker,text}], references:[...]}.
inline std::string to_canonical_line(const Sample& s) {
    nlohmann::json rec;
    rec["id"] = s.dialogue.id;
    rec["turns"] = nlohmann::json::array();
    for (const auto& u : s.dialogue.turns)
        rec["turns"].push_back({{"speaker", u.speaker}, {"text", u.text}});
    rec["references"] = s.references;
    return rec.dump();
}

inline void save_canonical(const std::vector<Sample>& samples, const std::filesystem::path& path) {
    std::string out;
    for (const auto& s : samples) {
        out += to_canonical_line(s);
        out += '\n';
    }
    write_file_atomic(path, out);
}

inline std::vector<Sample> load_canonical(const std::filesystem::path& path) {
    using namespace corpus_detail;
    std::vector<Sample> samples;
    size_t idx = 0;
    for (const std::string& line : read_lines(path)) {
        if (trim(line).empty()) continue;
        std::string where = "record " + std::to_string(idx);
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(where + ": invalid JSON: " + e.what());
        }
        Sample s;
        s.dialogue.id = require_string(rec, "id", where);
        if (!rec.contains("turns") || !rec["turns"].is_array() || rec["turns"].empty())
            throw Error(where + ": missing field \"turns\"");
        for (const auto& t : rec["turns"]) {
            Utterance u;
            u.speaker = require_string(t, "speaker", where);
            u.text = t.contains("text") ? t["text"].get<std::string>() : std::string{};
            validate_utterance(u, where);
            s.dialogue.turns.push_back(std::move(u));
        }
        if (!rec.contains("references") || !rec["references"].is_array())
            throw Error(where + ": missing field \"references\"");
        s.references = rec["references"].get<std::vector<std::string>>();
        validate_references(s.references, where);
        samples.push_back(std::move(s));
        ++idx;
    }
    if (samples.empty()) throw Error("empty file: " + path.string());
    return samples;
}

// Resolves "<dataset dir> + split" to the conventional file name.
inline std::filesystem::path resolve_split_path(const std::filesystem::path& dir,
                                                std::string_view split) {
    namespace fs = std::filesystem;
    for (const auto& name :
         {std::string(split) + ".json", std::string(split) + ".jsonl",
          "dialogsum." + std::string(split) + ".jsonl"}) {
        if (fs::exists(dir / name)) return dir / name;
    }
    throw Error("no " + std::string(split) + " split found under " + dir.string());
}

// Loads source-format files or canonical files; canonical is detected by the
// "turns" field in the first record.
inline std::vector<Sample> load_any(const std::filesystem::path& path,
                                    std::string_view format_hint = "") {
    if (!format_hint.empty() && format_hint != "canonical")
        return load_split(path, parse_corpus_format(format_hint));
    std::string content = read_file(path);
    std::string_view head = trim(content);
    if (head.empty()) throw Error("empty file: " + path.string());
    if (head.front() == '[') return load_split(path, CorpusFormat::samsum_json);
    size_t nl = head.find('\n');
    std::string_view first_line = nl == std::string_view::npos ? head : head.substr(0, nl);
    if (first_line.find("\"turns\"") != std::string_view::npos) return load_canonical(path);
    return load_split(path, CorpusFormat::dialsumm_jsonl);
}

inline CorpusStats compute_stats(const std::vector<Sample>& samples,
                                 ReferenceMode mode = ReferenceMode::all) {
    if (samples.empty()) throw Error("compute_stats: empty sample list");
    double iw_sum = 0.0, ow_sum = 0.0;
    for (const auto& s : samples) {
        iw_sum += static_cast<double>(word_count(serialize_dialogue(s.dialogue)));
        if (mode == ReferenceMode::first) {
            ow_sum += static_cast<double>(word_count(s.references.front()));
        } else {
            double acc = 0.0;
            for (const auto& r : s.references) acc += static_cast<double>(word_count(r));
            ow_sum += acc / static_cast<double>(s.references.size());
        }
    }
    CorpusStats st;
    st.n_samples = samples.size();
    st.iw = iw_sum / static_cast<double>(samples.size());
    st.ow = ow_sum / static_cast<double>(samples.size());
    st.cr = st.ow / st.iw;
    return st;
}

}  // namespace dialsum
