#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dialsum/rouge.hpp"
#include "test_support.hpp"

using namespace dialsum;

TEST_CASE("porter stemmer canonical pairs") {
    const std::pair<const char*, const char*> cases[] = {
        {"caresses", "caress"}, {"ponies", "poni"},     {"ties", "ti"},
        {"caress", "caress"},   {"cats", "cat"},        {"feed", "feed"},
        {"agreed", "agre"},     {"motoring", "motor"},  {"sing", "sing"},
        {"hopping", "hop"},     {"falling", "fall"},    {"filing", "file"},
        {"happy", "happi"},     {"sky", "sky"},         {"relational", "relat"},
        {"conditional", "condit"}, {"rational", "ration"}, {"oscillators", "oscil"},
        {"angry", "angri"},     {"hopeful", "hope"},    {"goodness", "good"},
        {"electrical", "electr"}, {"adjustment", "adjust"}, {"dependent", "depend"},
        {"formalize", "formal"}, {"conflated", "conflat"}, {"replacement", "replac"},
        {"is", "is"},           {"a", "a"},
    };
    for (auto [in, want] : cases) {
        CAPTURE(in);
        CHECK(porter_stem(in) == want);
    }
}

TEST_CASE("normalize lowercases, splits on non-alphanumerics, stems") {
    CHECK(normalize("Emilia is STILL angry.") ==
          std::vector<std::string>{"emilia", "is", "still", "angri"});
    CHECK(normalize("") == std::vector<std::string>{});
    CHECK(normalize("it's 6 pm") == std::vector<std::string>{"it", "s", "6", "pm"});
    NormalizeOpts raw;
    raw.stem = false;
    raw.lowercase = false;
    CHECK(normalize("Emilia angry", raw) == std::vector<std::string>{"Emilia", "angry"});
}

TEST_CASE("rouge_n hand cases") {
    SUBCASE("identical strings score 1") {
        for (int n : {1, 2}) {
            Score s = rouge_n("the cat sat down", "the cat sat down", n);
            CHECK(s.f1 == doctest::Approx(1.0));
            CHECK(s.precision == doctest::Approx(1.0));
        }
    }
    SUBCASE("disjoint vocabularies score 0") {
        for (int n : {1, 2}) CHECK(rouge_n("aa bb cc", "dd ee ff", n).f1 == 0.0);
    }
    SUBCASE("a b c vs a b d") {
        Score r1 = rouge_n("a b c", "a b d", 1);
        CHECK(r1.precision == doctest::Approx(2.0 / 3));
        CHECK(r1.recall == doctest::Approx(2.0 / 3));
        CHECK(r1.f1 == doctest::Approx(2.0 / 3));
        Score r2 = rouge_n("a b c", "a b d", 2);
        CHECK(r2.precision == doctest::Approx(0.5));
        CHECK(r2.recall == doctest::Approx(0.5));
        CHECK(r2.f1 == doctest::Approx(0.5));
    }
    SUBCASE("clipping repeats") {
        // candidate has "a" twice, reference once
        Score r1 = rouge_n("a a", "a b", 1);
        CHECK(r1.precision == doctest::Approx(0.5));
        CHECK(r1.recall == doctest::Approx(0.5));
    }
    SUBCASE("empty candidate") { CHECK(rouge_n("", "a b", 1).f1 == 0.0); }
    SUBCASE("n outside 1..2 rejected") { CHECK_THROWS_AS(rouge_n("a", "a", 3), Error); }
}

TEST_CASE("rouge_l hand cases") {
    CHECK(rouge_l("x y z", "x y z").f1 == doctest::Approx(1.0));
    Score s = rouge_l("a c b", "a b c");
    CHECK(s.precision == doctest::Approx(2.0 / 3));
    CHECK(s.recall == doctest::Approx(2.0 / 3));
    CHECK(s.f1 == doctest::Approx(2.0 / 3));
    CHECK(rouge_l("", "a b c").f1 == 0.0);
}

TEST_CASE("rouge_n matches the brute-force overlap on fixed random cases") {
    std::mt19937_64 rng(404);
    const std::vector<std::string> alphabet = {"a", "b", "c", "d", "e"};
    for (int i = 0; i < 50; ++i) {
        auto draw = [&](size_t len) {
            std::vector<std::string> out;
            std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
            for (size_t k = 0; k < len; ++k) out.push_back(alphabet[pick(rng)]);
            return out;
        };
        std::uniform_int_distribution<size_t> len_dist(0, 9);
        auto cand = draw(len_dist(rng));
        auto ref = draw(len_dist(rng));
        CAPTURE(i);
        for (size_t n : {size_t{1}, size_t{2}}) {
            size_t overlap = testing::ngram_overlap_bruteforce(cand, ref, n);
            Score got = rouge_n_tokens(cand, ref, static_cast<int>(n));
            size_t cn = cand.size() >= n ? cand.size() - n + 1 : 0;
            size_t rn = ref.size() >= n ? ref.size() - n + 1 : 0;
            double p = cn ? double(overlap) / double(cn) : 0.0;
            double r = rn ? double(overlap) / double(rn) : 0.0;
            CHECK(got.precision == doctest::Approx(p));
            CHECK(got.recall == doctest::Approx(r));
        }
    }
}

TEST_CASE("rouge_l equals the exhaustive LCS oracle on short sequences") {
    std::mt19937_64 rng(77);
    const std::vector<std::string> alphabet = {"a", "b", "c"};
    for (int i = 0; i < 2000; ++i) {
        std::uniform_int_distribution<size_t> len_dist(0, 8);
        auto draw = [&](size_t len) {
            std::vector<std::string> out;
            std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
            for (size_t k = 0; k < len; ++k) out.push_back(alphabet[pick(rng)]);
            return out;
        };
        auto a = draw(len_dist(rng));
        auto b = draw(len_dist(rng));
        CHECK(lcs_length(a, b) == testing::lcs_bruteforce(a, b));
    }
}

TEST_CASE("swapping equal-length arguments swaps precision and recall") {
    std::mt19937_64 rng(11);
    const std::vector<std::string> alphabet = {"u", "v", "w", "x"};
    for (int i = 0; i < 200; ++i) {
        std::uniform_int_distribution<size_t> len_dist(1, 7);
        size_t len = len_dist(rng);
        auto draw = [&] {
            std::vector<std::string> out;
            std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
            for (size_t k = 0; k < len; ++k) out.push_back(alphabet[pick(rng)]);
            return out;
        };
        auto a = draw(), b = draw();
        for (int n : {1, 2}) {
            Score ab = rouge_n_tokens(a, b, n);
            Score ba = rouge_n_tokens(b, a, n);
            CHECK(ab.precision == doctest::Approx(ba.recall));
            CHECK(ab.recall == doctest::Approx(ba.precision));
            CHECK(ab.f1 == doctest::Approx(ba.f1));
        }
        Score ab = rouge_l_tokens(a, b);
        Score ba = rouge_l_tokens(b, a);
        CHECK(ab.precision == doctest::Approx(ba.recall));
        CHECK(ab.f1 == doctest::Approx(ba.f1));
    }
}

TEST_CASE("rouge_multi takes the per-metric max over references") {
    SUBCASE("single reference is the identity") {
        RougeScore single = rouge_all("a b c", "a b d");
        RougeScore multi = rouge_multi("a b c", {"a b d"});
        CHECK(multi.r1.f1 == doctest::Approx(single.r1.f1));
        CHECK(multi.r2.f1 == doctest::Approx(single.r2.f1));
        CHECK(multi.rl.f1 == doctest::Approx(single.rl.f1));
    }
    SUBCASE("exact reference dominates") {
        RougeScore s = rouge_multi("a b", {"a b", "zzz"});
        CHECK(s.r1.f1 == doctest::Approx(1.0));
        CHECK(s.r2.f1 == doctest::Approx(1.0));
        CHECK(s.rl.f1 == doctest::Approx(1.0));
    }
    SUBCASE("two equal scores") {
        RougeScore s = rouge_multi("a b", {"a x", "b y"});
        CHECK(s.r1.f1 == doctest::Approx(0.5));
    }
    SUBCASE("empty reference list rejected") {
        CHECK_THROWS_AS(rouge_multi("a", {}), Error);
    }
    SUBCASE("appending a reference never lowers any f1") {
        std::mt19937_64 rng(5);
        const std::vector<std::string> words = {"cat", "dog", "fox", "owl"};
        for (int i = 0; i < 100; ++i) {
            auto draw = [&] {
                std::uniform_int_distribution<size_t> len(1, 6), pick(0, words.size() - 1);
                std::string s;
                size_t n = len(rng);
                for (size_t k = 0; k < n; ++k) {
                    if (!s.empty()) s += ' ';
                    s += words[pick(rng)];
                }
                return s;
            };
            std::string cand = draw();
            std::vector<std::string> refs = {draw()};
            RougeScore before = rouge_multi(cand, refs);
            refs.push_back(draw());
            RougeScore after = rouge_multi(cand, refs);
            CHECK(after.r1.f1 >= before.r1.f1 - 1e-12);
            CHECK(after.r2.f1 >= before.r2.f1 - 1e-12);
            CHECK(after.rl.f1 >= before.rl.f1 - 1e-12);
        }
    }
}

TEST_CASE("all scores stay inside [0,1]") {
    std::mt19937_64 rng(99);
    const std::vector<std::string> words = {"m", "n", "o", "p", "q"};
    for (int i = 0; i < 300; ++i) {
        auto draw = [&] {
            std::uniform_int_distribution<size_t> len(0, 10), pick(0, words.size() - 1);
            std::vector<std::string> s;
            size_t n = len(rng);
            for (size_t k = 0; k < n; ++k) s.push_back(words[pick(rng)]);
            return s;
        };
        auto a = draw(), b = draw();
        for (const Score& s :
             {rouge_n_tokens(a, b, 1), rouge_n_tokens(a, b, 2), rouge_l_tokens(a, b)}) {
            CHECK(s.precision >= 0.0);
            CHECK(s.precision <= 1.0);
            CHECK(s.recall >= 0.0);
            CHECK(s.recall <= 1.0);
            CHECK(s.f1 >= 0.0);
            CHECK(s.f1 <= 1.0);
        }
    }
}
