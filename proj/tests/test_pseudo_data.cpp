#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dialsum/pseudo_data.hpp"
#include "dialsum/toy_corpus.hpp"
#include "test_support.hpp"

using namespace dialsum;

TEST_CASE("build_dialsent on the worked example yields the two resolved pairs") {
    auto pairs = build_dialsent({testing::flat_rental_sample()});
    REQUIRE(pairs.size() == 2);
    std::string source = serialize_dialogue(testing::flat_rental_sample().dialogue);
    CHECK(pairs[0].source == source);
    CHECK(pairs[1].source == source);
    CHECK(pairs[0].target == "Katarina wants to rent a flat from Liz.");
    CHECK(pairs[1].target == "Katarina will come visit it today after 6 pm.");
    CHECK(pairs[0].sent_index == 0);
    CHECK(pairs[1].sent_index == 1);
    CHECK(pairs[0].variant == Variant::DialSent);
    CHECK(pairs[0].origin_id == "flat-rental");
}

TEST_CASE("sentences with fewer than 3 words are discarded") {
    Sample s;
    s.dialogue.id = "short";
    s.dialogue.turns = {{"A", "did Ally agree"}, {"B", "yes"}};
    s.references = {"Ally agree."};
    CHECK(build_dialsent({s}).empty());

    s.references = {"Ally agree. Bob proposed the plan."};
    auto pairs = build_dialsent({s});
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].target == "Bob proposed the plan.");
}

TEST_CASE("every dialsent target re-splits to one sentence with >= 3 words") {
    auto samples = make_toy_samples(30, 21);
    auto pairs = build_dialsent(samples);
    CHECK(pairs.size() > samples.size());  // pronoun templates yield 2 sentences
    for (const auto& p : pairs) {
        CHECK(split_sentences(p.target).size() == 1);
        CHECK(word_count(p.target) >= 3);
    }
}

TEST_CASE("build_dialindirect renders the says template") {
    Sample one;
    one.dialogue.id = "t1";
    one.dialogue.turns = {{"A", "hi"}};
    one.references = {"greeting happened here"};
    auto pairs = build_dialindirect({one});
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].target == "A says,\"hi\"");

    Sample two = one;
    two.dialogue.turns.push_back({"B", "yo"});
    pairs = build_dialindirect({two});
    CHECK(pairs[0].target == "A says,\"hi\" B says,\"yo\"");
    CHECK(pairs[0].source == "A: hi\nB: yo");
}

TEST_CASE("oracle_extract single turn") {
    Dialogue d;
    d.id = "one";
    d.turns = {{"A", "hello there"}};
    ExtractionResult r = oracle_extract(d, "anything at all", false);
    CHECK(r.indices == std::vector<size_t>{0});
}

TEST_CASE("oracle_extract zero-overlap target keeps the lowest-index turn") {
    Dialogue d;
    d.id = "zero";
    d.turns = {{"A", "xx yy"}, {"B", "zz ww"}, {"A", "qq"}};
    ExtractionResult r = oracle_extract(d, "totally disjoint words", false);
    CHECK(r.indices == std::vector<size_t>{0});
    CHECK(r.score == 0.0);
}

TEST_CASE("oracle_extract on the worked example picks turns 3 and 6") {
    Sample s = testing::flat_rental_sample();
    ExtractionResult plain = oracle_extract(s.dialogue, s.references.front(), false);
    CHECK(plain.indices == std::vector<size_t>{2, 5});  // U_3 and U_6, 1-based

    ExtractionResult closed = oracle_extract(s.dialogue, s.references.front(), true);
    CHECK(closed.indices == std::vector<size_t>{2, 3, 4, 5});  // U_3..U_6
}

TEST_CASE("greedy objective is non-decreasing and the loop terminates") {
    std::mt19937_64 rng(31);
    const std::vector<std::string> words = {"alpha", "beta",  "gamma", "delta",
                                            "eps",   "zeta",  "eta",   "theta"};
    for (int iter = 0; iter < 200; ++iter) {
        Dialogue d;
        d.id = "r" + std::to_string(iter);
        std::uniform_int_distribution<size_t> turns(1, 6), words_per(1, 5),
            pick(0, words.size() - 1);
        size_t T = turns(rng);
        for (size_t t = 0; t < T; ++t) {
            std::string text;
            size_t W = words_per(rng);
            for (size_t w = 0; w < W; ++w) {
                if (!text.empty()) text += ' ';
                text += words[pick(rng)];
            }
            d.turns.push_back({"S" + std::to_string(t % 2), text});
        }
        std::string target;
        size_t W = words_per(rng) + 2;
        for (size_t w = 0; w < W; ++w) {
            if (!target.empty()) target += ' ';
            target += words[pick(rng)];
        }
        ExtractionResult r = oracle_extract(d, target, false);
        REQUIRE(!r.indices.empty());
        CHECK(r.indices.size() <= T);
        for (size_t i = 1; i < r.indices.size(); ++i) CHECK(r.indices[i] > r.indices[i - 1]);
        REQUIRE(r.step_scores.size() == r.indices.size());
        for (size_t k = 1; k < r.step_scores.size(); ++k)
            CHECK(r.step_scores[k] > r.step_scores[k - 1]);  // strict improvement per step
        CHECK(r.score == doctest::Approx(r.step_scores.back()));

        // the final selection reproduces the reported score
        Dialogue chosen = subset_dialogue(d, r.indices);
        Score r1 = rouge_n(serialize_dialogue(chosen), target, 1);
        Score r2 = rouge_n(serialize_dialogue(chosen), target, 2);
        CHECK(0.5 * (r1.f1 + r2.f1) == doctest::Approx(r.score));

        ExtractionResult m = oracle_extract(d, target, true);
        for (size_t i = 1; i < m.indices.size(); ++i)
            CHECK(m.indices[i] == m.indices[i - 1] + 1);  // contiguous
    }
}

TEST_CASE("extsum sources never shrink under the modified variant") {
    auto samples = make_toy_samples(15, 5);
    auto plain = build_extsum(samples, false);
    auto closed = build_extsum(samples, true);
    REQUIRE(plain.size() == samples.size());
    REQUIRE(closed.size() == samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
        CHECK(word_count(closed[i].source) >= word_count(plain[i].source));
        CHECK(plain[i].target == samples[i].references.front());
        CHECK(closed[i].variant == Variant::ExtSumM);
    }
}

TEST_CASE("extsent pair count equals dialsent pair count") {
    auto samples = make_toy_samples(20, 9);
    auto dialsent = build_dialsent(samples);
    auto extsent = build_extsent(samples, false);
    auto extsentm = build_extsent(samples, true);
    CHECK(extsent.size() == dialsent.size());
    CHECK(extsentm.size() == dialsent.size());
    for (size_t i = 0; i < extsent.size(); ++i) {
        CHECK(extsent[i].target == dialsent[i].target);
        // extracted source is a turn-subset, never longer than the dialogue
        CHECK(word_count(extsent[i].source) <= word_count(dialsent[i].source));
    }
}

TEST_CASE("builders are deterministic and order-preserving under workers") {
    auto samples = make_toy_samples(24, 12);
    AnnotateOptions serial;
    AnnotateOptions parallel;
    parallel.workers = 4;
    auto a = build_dialsent(samples, serial);
    auto b = build_dialsent(samples, parallel);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].source == b[i].source);
        CHECK(a[i].target == b[i].target);
        CHECK(a[i].origin_id == b[i].origin_id);
    }
    auto e1 = build_extsum(samples, true, 1);
    auto e2 = build_extsum(samples, true, 3);
    for (size_t i = 0; i < e1.size(); ++i) CHECK(e1[i].source == e2[i].source);
}

TEST_CASE("pair records round-trip through jsonl") {
    testing::TempDir dir("pairs");
    auto samples = make_toy_samples(6, 2);
    auto pairs = build_dialsent(samples);
    pairs[0].prefix_tokens = 2;
    auto path = dir.path() / "pairs.jsonl";
    save_pairs(pairs, path);
    auto loaded = load_pairs(path);
    REQUIRE(loaded.size() == pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
        CHECK(loaded[i].source == pairs[i].source);
        CHECK(loaded[i].target == pairs[i].target);
        CHECK(loaded[i].sent_index == pairs[i].sent_index);
        CHECK(loaded[i].variant == pairs[i].variant);
        CHECK(loaded[i].prefix_tokens == pairs[i].prefix_tokens);
    }
    CHECK_THROWS_AS(load_pairs(dir.path() / "missing.jsonl"), Error);
}

TEST_CASE("dsum pairs carry the full dialogue and raw summary") {
    auto samples = make_toy_samples(4, 3);
    auto pairs = build_dsum(samples);
    REQUIRE(pairs.size() == samples.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
        CHECK(pairs[i].source == serialize_dialogue(samples[i].dialogue));
        CHECK(pairs[i].target == samples[i].references.front());
        CHECK(pairs[i].sent_index == -1);
    }
}
