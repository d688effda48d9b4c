#pragma once

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dialsum/io.hpp"

namespace dialsum {

// Reserved token ids shared by every model in the project.
constexpr int kPadId = 0;
constexpr int kBosId = 1;
constexpr int kEosId = 2;
constexpr int kUnkId = 3;

// Case-preserving word tokenizer: alphanumeric runs (with internal
// apostrophes/hyphens) plus single punctuation characters.
inline std::vector<std::string> word_tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    size_t i = 0, n = text.size();
    auto word_char = [&](size_t k) {
        unsigned char c = static_cast<unsigned char>(text[k]);
        if (std::isalnum(c)) return true;
        if ((text[k] == '\'' || text[k] == '-') && k > 0 && k + 1 < n &&
            std::isalnum(static_cast<unsigned char>(text[k - 1])) &&
            std::isalnum(static_cast<unsigned char>(text[k + 1])))
            return true;
        return false;
    };
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (std::isalnum(c)) {
            size_t b = i;
            while (i < n && word_char(i)) ++i;
            tokens.emplace_back(text.substr(b, i - b));
        } else {
            tokens.emplace_back(text.substr(i, 1));
            ++i;
        }
    }
    return tokens;
}

class Vocabulary {
public:
    Vocabulary() { for (const char* t : {"<pad>", "<bos>", "<eos>", "<unk>"}) add(t); }

    // Most frequent tokens first; ties broken lexicographically.
    static Vocabulary fit(const std::vector<std::string>& texts, size_t max_size = 32000) {
        std::unordered_map<std::string, size_t> freq;
        for (const auto& t : texts)
            for (auto& tok : word_tokenize(t)) ++freq[tok];
        std::vector<std::pair<std::string, size_t>> ranked(freq.begin(), freq.end());
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        Vocabulary v;
        for (const auto& [tok, cnt] : ranked) {
            if (v.size() >= max_size) break;
            v.add(tok);
        }
        return v;
    }

    size_t size() const { return tokens_.size(); }

    int id(std::string_view tok) const {
        auto it = ids_.find(std::string(tok));
        return it == ids_.end() ? kUnkId : it->second;
    }

    const std::string& token(int id) const {
        if (id < 0 || static_cast<size_t>(id) >= tokens_.size())
            throw Error("vocabulary: token id out of range: " + std::to_string(id));
        return tokens_[static_cast<size_t>(id)];
    }

    std::vector<int> encode(std::string_view text) const {
        std::vector<int> out;
        for (auto& tok : word_tokenize(text)) out.push_back(id(tok));
        return out;
    }

    // Joins tokens with spaces, attaching closing punctuation.
    std::string decode(const std::vector<int>& ids) const {
        std::string out;
        for (int id : ids) {
            if (id == kPadId || id == kBosId || id == kEosId) continue;
            const std::string& tok = token(id);
            bool attach = tok.size() == 1 && std::strchr(".,!?;:)", tok[0]) != nullptr;
            if (!out.empty() && !attach) out += ' ';
            out += tok;
        }
        return out;
    }

    // Number of model tokens for a text span; id-independent.
    static size_t token_count(std::string_view text) { return word_tokenize(text).size(); }

    // One token per line; the line number is the id.
    void save(const std::filesystem::path& path) const {
        std::string out;
        for (const auto& t : tokens_) {
            out += t;
            out += '\n';
        }
        write_file_atomic(path, out);
    }

    static Vocabulary load(const std::filesystem::path& path) {
        Vocabulary v;
        v.tokens_.clear();
        v.ids_.clear();
        for (const std::string& line : read_lines(path)) {
            if (line.empty()) continue;
            v.add(line);
        }
        if (v.size() < 4 || v.tokens_[0] != "<pad>" || v.tokens_[1] != "<bos>" ||
            v.tokens_[2] != "<eos>" || v.tokens_[3] != "<unk>")
            throw Error("vocabulary: missing reserved tokens in " + path.string());
        return v;
    }

private:
    void add(const std::string& tok) {
        if (ids_.count(tok)) return;
        ids_[tok] = static_cast<int>(tokens_.size());
        tokens_.push_back(tok);
    }

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> ids_;
};

}  // namespace dialsum
