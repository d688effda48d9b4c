#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "dialsum/corpus.hpp"
#include "test_support.hpp"

using namespace dialsum;

namespace {

std::filesystem::path write_tmp(const testing::TempDir& dir, const std::string& name,
                                const std::string& content) {
    auto p = dir.path() / name;
    write_file_atomic(p, content);
    return p;
}

}  // namespace

TEST_CASE("serialize_dialogue joins turns with single newlines") {
    Dialogue d;
    d.turns = {{"A", "hi"}};
    CHECK(serialize_dialogue(d) == "A: hi");
    d.turns.push_back({"B", "yo"});
    CHECK(serialize_dialogue(d) == "A: hi\nB: yo");
}

TEST_CASE("samsum-style records load with \\r\\n turn separators") {
    testing::TempDir dir("corpus_samsum");
    auto path = write_tmp(dir, "train.json",
                          R"([{"id":"x","dialogue":"A: hi\r\nB: yo","summary":"A greets B."}])");
    auto samples = load_split(path, CorpusFormat::samsum_json);
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].dialogue.id == "x");
    REQUIRE(samples[0].dialogue.turns.size() == 2);
    CHECK(samples[0].dialogue.turns[0].speaker == "A");
    CHECK(samples[0].dialogue.turns[0].text == "hi");
    CHECK(samples[0].dialogue.turns[1].speaker == "B");
    CHECK(samples[0].references == std::vector<std::string>{"A greets B."});
}

TEST_CASE("malformed records name the index and field") {
    testing::TempDir dir("corpus_bad");
    SUBCASE("missing summary") {
        auto path = write_tmp(dir, "bad.json", R"([{"id":"x","dialogue":"A: hi"}])");
        CHECK_THROWS_WITH_AS(load_split(path, CorpusFormat::samsum_json),
                             doctest::Contains("record 0: missing field \"summary\""), Error);
    }
    SUBCASE("empty summary") {
        auto path =
            write_tmp(dir, "empty_ref.json", R"([{"id":"x","dialogue":"A: hi","summary":""}])");
        CHECK_THROWS_WITH_AS(load_split(path, CorpusFormat::samsum_json),
                             doctest::Contains("empty reference at index 0"), Error);
    }
    SUBCASE("second record malformed") {
        auto path = write_tmp(
            dir, "bad2.json",
            R"([{"id":"x","dialogue":"A: hi","summary":"s"},{"id":"y","summary":"s"}])");
        CHECK_THROWS_WITH_AS(load_split(path, CorpusFormat::samsum_json),
                             doctest::Contains("record 1: missing field \"dialogue\""), Error);
    }
    SUBCASE("empty file") {
        auto path = write_tmp(dir, "empty.json", "");
        CHECK_THROWS_WITH_AS(load_split(path, CorpusFormat::samsum_json),
                             doctest::Contains("empty file"), Error);
        auto path2 = write_tmp(dir, "empty_array.json", "[]");
        CHECK_THROWS_AS(load_split(path2, CorpusFormat::samsum_json), Error);
    }
}

TEST_CASE("dialsumm-style records carry up to three references") {
    testing::TempDir dir("corpus_dialsumm");
    auto path = write_tmp(
        dir, "test.jsonl",
        "{\"fname\":\"dev_0\",\"dialogue\":\"#Person1#: hello\\n#Person2#: hi\",\"summary\":\"s1\","
        "\"summary2\":\"s2\",\"summary3\":\"s3\"}\n"
        "{\"fname\":\"dev_1\",\"dialogue\":\"#Person1#: bye\",\"summary\":\"only one\"}\n");
    auto samples = load_split(path, CorpusFormat::dialsumm_jsonl);
    REQUIRE(samples.size() == 2);
    CHECK(samples[0].dialogue.id == "dev_0");
    CHECK(samples[0].references == std::vector<std::string>{"s1", "s2", "s3"});
    CHECK(samples[0].dialogue.turns[0].speaker == "#Person1#");
    CHECK(samples[1].references.size() == 1);
}

TEST_CASE("lines without a speaker continue the previous turn") {
    testing::TempDir dir("corpus_cont");
    auto path = write_tmp(
        dir, "c.json", R"([{"id":"x","dialogue":"A: hi\r\nstill me\r\nB: yo","summary":"s"}])");
    auto samples = load_split(path, CorpusFormat::samsum_json);
    REQUIRE(samples[0].dialogue.turns.size() == 2);
    CHECK(samples[0].dialogue.turns[0].text == "hi still me");
}

TEST_CASE("emoticon after the colon stays in the utterance") {
    testing::TempDir dir("corpus_emot");
    auto path =
        write_tmp(dir, "e.json", R"([{"id":"x","dialogue":"William: :(","summary":"sad"}])");
    auto samples = load_split(path, CorpusFormat::samsum_json);
    CHECK(samples[0].dialogue.turns[0].speaker == "William");
    CHECK(samples[0].dialogue.turns[0].text == ":(");
}

TEST_CASE("canonical round trip preserves samples") {
    testing::TempDir dir("corpus_canon");
    std::vector<Sample> samples = {testing::flat_rental_sample()};
    samples[0].references.push_back("Second reference.");
    auto path = dir.path() / "canon.jsonl";
    save_canonical(samples, path);
    auto loaded = load_canonical(path);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].dialogue.id == samples[0].dialogue.id);
    CHECK(loaded[0].dialogue.turns.size() == samples[0].dialogue.turns.size());
    CHECK(loaded[0].references == samples[0].references);
    CHECK(serialize_dialogue(loaded[0].dialogue) == serialize_dialogue(samples[0].dialogue));

    SUBCASE("load_any detects the canonical format") {
        auto again = load_any(path);
        CHECK(again.size() == 1);
    }
}

TEST_CASE("compute_stats on a hand-sized sample") {
    Sample s;
    s.dialogue.id = "t";
    s.dialogue.turns = {{"A", "one two three four"}, {"B", "five six seven eight"}};
    // serialized: "A: one two three four\nB: five six seven eight" = 10 words
    s.references = {"one two three four five"};
    CorpusStats st = compute_stats({s});
    CHECK(st.n_samples == 1);
    CHECK(st.iw == doctest::Approx(10.0));
    CHECK(st.ow == doctest::Approx(5.0));
    CHECK(st.cr == doctest::Approx(0.5));
    CHECK_THROWS_AS(compute_stats({}), Error);
}

TEST_CASE("compute_stats reference modes") {
    Sample s;
    s.dialogue.turns = {{"A", "w w w w"}};  // serialized = 5 words
    s.references = {"a b", "a b c d"};
    CHECK(compute_stats({s}, ReferenceMode::first).ow == doctest::Approx(2.0));
    CHECK(compute_stats({s}, ReferenceMode::all).ow == doctest::Approx(3.0));
}

TEST_CASE("stats are permutation invariant and cr == ow/iw exactly") {
    std::mt19937_64 rng(3);
    std::vector<Sample> samples;
    for (int i = 0; i < 20; ++i) {
        Sample s;
        s.dialogue.id = std::to_string(i);
        std::uniform_int_distribution<int> turns(1, 5), words(1, 9);
        int T = turns(rng);
        for (int t = 0; t < T; ++t) {
            std::string text;
            int W = words(rng);
            for (int w = 0; w < W; ++w) text += w ? " w" : "w";
            s.dialogue.turns.push_back({"S" + std::to_string(t), text});
        }
        s.references = {"some ref words here"};
        samples.push_back(std::move(s));
    }
    CorpusStats st = compute_stats(samples);
    CHECK(st.cr == doctest::Approx(st.ow / st.iw).epsilon(1e-12));
    auto shuffled = samples;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CorpusStats st2 = compute_stats(shuffled);
    CHECK(st2.iw == doctest::Approx(st.iw).epsilon(1e-12));
    CHECK(st2.ow == doctest::Approx(st.ow).epsilon(1e-12));
}

TEST_CASE("serialize_dialogue is injective over newline-free dialogues") {
    // distinct generated dialogues must serialize to distinct strings
    std::mt19937_64 rng(8);
    std::vector<Dialogue> dialogues;
    const std::vector<std::string> speakers = {"A", "B", "Ab"};
    const std::vector<std::string> texts = {"x", "y", "x y", ""};
    for (int i = 0; i < 200; ++i) {
        Dialogue d;
        std::uniform_int_distribution<size_t> turns(1, 3), sp(0, speakers.size() - 1),
            tx(0, texts.size() - 1);
        size_t T = turns(rng);
        for (size_t t = 0; t < T; ++t) d.turns.push_back({speakers[sp(rng)], texts[tx(rng)]});
        dialogues.push_back(std::move(d));
    }
    for (size_t i = 0; i < dialogues.size(); ++i) {
        for (size_t j = i + 1; j < dialogues.size(); ++j) {
            bool same_struct = dialogues[i].turns.size() == dialogues[j].turns.size();
            if (same_struct) {
                for (size_t t = 0; t < dialogues[i].turns.size(); ++t)
                    if (dialogues[i].turns[t].speaker != dialogues[j].turns[t].speaker ||
                        dialogues[i].turns[t].text != dialogues[j].turns[t].text) {
                        same_struct = false;
                        break;
                    }
            }
            if (!same_struct)
                CHECK(serialize_dialogue(dialogues[i]) != serialize_dialogue(dialogues[j]));
        }
    }
}
