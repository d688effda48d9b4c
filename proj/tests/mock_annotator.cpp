// Test stand-in for an external annotator process. Speaks the line protocol
// on stdin/stdout, answering with the library's own fallback annotations.
//
//   --swap     buffer requests in pairs and answer them in reverse order
//   --garbage  emit one non-JSON line before the first real response
//   --drop     read one request, then exit without answering

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dialsum/annotate.hpp"

using namespace dialsum;

namespace {

nlohmann::json annotation_to_json(const std::string& id, const Annotation& ann) {
    nlohmann::json resp;
    resp["id"] = id;
    resp["sentences"] = nlohmann::json::array();
    for (const auto& s : ann.sentences) {
        nlohmann::json js;
        js["text"] = s.text;
        js["words"] = nlohmann::json::array();
        for (const auto& w : s.words) {
            js["words"].push_back({{"text", w.text},
                                   {"pos", pos_name(w.pos)},
                                   {"is_root", w.is_root},
                                   {"start", w.begin},
                                   {"end", w.end}});
        }
        resp["sentences"].push_back(std::move(js));
    }
    resp["chains"] = nlohmann::json::array();
    for (const auto& c : ann.chains) {
        nlohmann::json jc;
        jc["mentions"] = nlohmann::json::array();
        for (const auto& m : c.mentions)
            jc["mentions"].push_back({m.sentence, m.begin, m.end});
        jc["representative"] = c.representative;
        resp["chains"].push_back(std::move(jc));
    }
    return resp;
}

}  // namespace

int main(int argc, char** argv) {
    bool swap = false, garbage = false, drop = false;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--swap") swap = true;
        if (a == "--garbage") garbage = true;
        if (a == "--drop") drop = true;
    }

    std::vector<std::string> held;
    std::string line;
    bool garbage_pending = garbage;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        nlohmann::json req = nlohmann::json::parse(line, nullptr, false);
        if (req.is_discarded() || !req.contains("id") || !req.contains("text")) {
            std::printf("bad request\n");
            std::fflush(stdout);
            continue;
        }
        if (drop) return 0;
        if (garbage_pending) {
            std::printf("this is not json\n");
            std::fflush(stdout);
            garbage_pending = false;
        }
        std::string id = req["id"].get<std::string>();
        std::string text = req["text"].get<std::string>();
        std::string resp = annotation_to_json(id, annotate_fallback(text)).dump();
        if (swap) {
            held.push_back(resp);
            if (held.size() == 2) {
                std::printf("%s\n%s\n", held[1].c_str(), held[0].c_str());
                std::fflush(stdout);
                held.clear();
            }
            continue;
        }
        std::printf("%s\n", resp.c_str());
        std::fflush(stdout);
    }
    for (const auto& r : held) {
        std::printf("%s\n", r.c_str());
        std::fflush(stdout);
    }
    return 0;
}
