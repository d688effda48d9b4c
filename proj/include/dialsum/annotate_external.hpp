#pragma once

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dialsum/annotate.hpp"
#include "dialsum/io.hpp"

namespace dialsum {

// One child process speaking the line protocol:
//   request:  {"id", "text", "tasks":["sentencize","pos","depparse","coref"]}
//   response: {"id", "sentences":[{"text","words":[...]}], "chains":[...]}
// Responses are matched by id; out-of-order arrival is tolerated.
class AnnotatorChannel {
public:
    explicit AnnotatorChannel(const std::string& command) {
        int to_child[2], from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0)
            throw Error("annotator: pipe() failed");
        // close-on-exec so sibling channels' children do not inherit these
        // ends and keep the pipes alive past our close()
        for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]})
            fcntl(fd, F_SETFD, FD_CLOEXEC);
        pid_ = fork();
        if (pid_ < 0) throw Error("annotator: fork() failed");
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);    // dup2 clears FD_CLOEXEC
            dup2(from_child[1], STDOUT_FILENO);
            execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        write_fd_ = to_child[1];
        read_fd_ = from_child[0];
    }

    AnnotatorChannel(const AnnotatorChannel&) = delete;
    AnnotatorChannel& operator=(const AnnotatorChannel&) = delete;

    ~AnnotatorChannel() {
        if (write_fd_ >= 0) close(write_fd_);
        if (read_fd_ >= 0) close(read_fd_);
        if (pid_ > 0) waitpid(pid_, nullptr, 0);
    }

    void send(const std::string& id, std::string_view text) {
        nlohmann::json req;
        req["id"] = id;
        req["text"] = std::string(text);
        req["tasks"] = {"sentencize", "pos", "depparse", "coref"};
        std::string line = req.dump();
        line += '\n';
        if (!write_all(line)) throw Error("annotator: child process unreachable (write failed)");
    }

    Annotation receive(const std::string& id, std::string_view original_text) {
        auto it = pending_.find(id);
        if (it != pending_.end()) {
            std::string line = std::move(it->second);
            pending_.erase(it);
            return parse_response(line, original_text);
        }
        for (;;) {
            std::string line;
            if (!read_line(line))
                throw Error("annotator: child process closed the stream while waiting for id " +
                            id);
            std::string got = peek_id(line);
            if (got == id) return parse_response(line, original_text);
            pending_[got] = std::move(line);
        }
    }

private:
    static std::string peek_id(const std::string& line) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            throw Error("annotator: protocol violation, raw response: " + line);
        }
        if (!doc.contains("id") || !doc["id"].is_string())
            throw Error("annotator: response missing id, raw response: " + line);
        return doc["id"].get<std::string>();
    }

    // Sentence offsets are reconstructed by locating each sentence text in
    // order; the backend must return sentences covering the text in order.
    Annotation parse_response(const std::string& line, std::string_view original) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            throw Error("annotator: protocol violation, raw response: " + line);
        }
        try {
            Annotation ann;
            size_t cursor = 0;
            for (const auto& s : doc.at("sentences")) {
                SentenceAnnotation sa;
                sa.text = s.at("text").get<std::string>();
                for (const auto& w : s.at("words")) {
                    Word word;
                    word.text = w.at("text").get<std::string>();
                    word.pos = parse_pos(w.at("pos").get<std::string>());
                    word.is_root = w.at("is_root").get<bool>();
                    word.begin = w.at("start").get<size_t>();
                    word.end = w.at("end").get<size_t>();
                    sa.words.push_back(std::move(word));
                }
                size_t off = original.find(sa.text, cursor);
                if (off == std::string_view::npos)
                    throw Error("annotator: sentence not found in source text: " + sa.text);
                ann.sentence_offsets.push_back(off);
                cursor = off + sa.text.size();
                ann.sentences.push_back(std::move(sa));
            }
            if (doc.contains("chains")) {
                for (const auto& c : doc["chains"]) {
                    CorefChain chain;
                    for (const auto& m : c.at("mentions")) {
                        if (!m.is_array() || m.size() != 3)
                            throw Error("annotator: bad mention triple");
                        chain.mentions.push_back({m[0].get<size_t>(), m[1].get<size_t>(),
                                                  m[2].get<size_t>()});
                    }
                    chain.representative = c.at("representative").get<size_t>();
                    if (chain.mentions.size() < 2) continue;
                    if (chain.representative >= chain.mentions.size())
                        throw Error("annotator: representative out of range");
                    chains_validate(chain, ann);
                    ann.chains.push_back(std::move(chain));
                }
            }
            return ann;
        } catch (const nlohmann::json::exception&) {
            throw Error("annotator: protocol violation, raw response: " + line);
        }
    }

    static void chains_validate(const CorefChain& chain, const Annotation& ann) {
        for (const auto& m : chain.mentions)
            if (m.sentence >= ann.sentences.size())
                throw Error("annotator: mention sentence index out of range");
    }

    bool write_all(std::string_view data) {
        size_t off = 0;
        while (off < data.size()) {
            ssize_t n = ::write(write_fd_, data.data() + off, data.size() - off);
            if (n <= 0) return false;
            off += static_cast<size_t>(n);
        }
        return true;
    }

    bool read_line(std::string& out) {
        out.clear();
        for (;;) {
            size_t nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                out = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return true;
            }
            char chunk[4096];
            ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
            if (n <= 0) return false;
            buffer_.append(chunk, static_cast<size_t>(n));
        }
    }

    pid_t pid_ = -1;
    int write_fd_ = -1;
    int read_fd_ = -1;
    std::string buffer_;
    std::map<std::string, std::string> pending_;
};

// Pool of channels, one in-flight request per channel by default. Batch
// results come back in input order regardless of completion order.
class ExternalAnnotator {
public:
    explicit ExternalAnnotator(std::string command, size_t channels = 1, size_t depth = 1)
        : command_(std::move(command)), depth_(std::max<size_t>(1, depth)) {
        if (command_.empty()) throw Error("annotator: empty command");
        channels = std::max<size_t>(1, channels);
        for (size_t i = 0; i < channels; ++i)
            pool_.push_back(std::make_unique<AnnotatorChannel>(command_));
    }

    static ExternalAnnotator from_env(size_t channels = 1) {
        const char* cmd = std::getenv("DIALSUM_ANNOTATOR_CMD");
        if (!cmd || !*cmd)
            throw Error("annotator: DIALSUM_ANNOTATOR_CMD is not set");
        return ExternalAnnotator(cmd, channels);
    }

    Annotation annotate(std::string_view text) {
        std::string id = "q" + std::to_string(next_id_++);
        pool_[0]->send(id, text);
        return pool_[0]->receive(id, text);
    }

    std::vector<Annotation> annotate_batch(const std::vector<std::string>& texts) {
        std::vector<Annotation> out(texts.size());
        size_t n_ch = pool_.size();
        parallel_for(n_ch, n_ch, [&](size_t ch) {
            // channel `ch` owns items ch, ch+n_ch, ...; pipeline up to depth_
            std::vector<std::pair<size_t, std::string>> in_flight;
            size_t next = ch;
            auto drain_one = [&] {
                auto [idx, id] = in_flight.front();
                in_flight.erase(in_flight.begin());
                out[idx] = pool_[ch]->receive(id, texts[idx]);
            };
            while (next < texts.size() || !in_flight.empty()) {
                if (next < texts.size() && in_flight.size() < depth_) {
                    std::string id = "q" + std::to_string(next);
                    pool_[ch]->send(id, texts[next]);
                    in_flight.emplace_back(next, id);
                    next += n_ch;
                } else {
                    drain_one();
                }
            }
        });
        return out;
    }

private:
    std::string command_;
    size_t depth_;
    size_t next_id_ = 0;
    std::vector<std::unique_ptr<AnnotatorChannel>> pool_;
};

// Unified entry point for the two backends.
inline Annotation annotate(std::string_view text, AnnotateBackend backend) {
    if (backend == AnnotateBackend::fallback) return annotate_fallback(text);
    return ExternalAnnotator::from_env().annotate(text);
}

}  // namespace dialsum
