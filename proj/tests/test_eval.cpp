#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dialsum/eval.hpp"
#include "dialsum/toy_corpus.hpp"
#include "test_support.hpp"

using namespace dialsum;

namespace {

Dialogue turns_of_lengths(const std::vector<int>& lengths) {
    Dialogue d;
    d.id = "lens";
    for (size_t i = 0; i < lengths.size(); ++i) {
        std::string text;
        for (int w = 0; w < lengths[i]; ++w) text += (w ? " w" : "w");
        d.turns.push_back({"S" + std::to_string(i), text});
    }
    return d;
}

// Student-t two-sided p via direct numerical integration of the density;
// independent of the incomplete-beta route used by the implementation.
double t_two_sided_p_quadrature(double t, int df) {
    auto pdf = [df](double x) {
        double nu = df;
        double log_c = std::lgamma((nu + 1) / 2.0) - std::lgamma(nu / 2.0) -
                       0.5 * std::log(nu * M_PI);
        return std::exp(log_c - (nu + 1) / 2.0 * std::log1p(x * x / nu));
    };
    double a = std::fabs(t);
    // integrate pdf on [0, a] with Simpson's rule
    const int n = 40000;
    double h = a / n;
    double acc = pdf(0.0) + pdf(a);
    for (int i = 1; i < n; ++i) acc += pdf(i * h) * (i % 2 ? 4.0 : 2.0);
    double integral = acc * h / 3.0;
    return 2.0 * (0.5 - integral);
}

}  // namespace

TEST_CASE("lead3 and longest3") {
    SUBCASE("two-turn dialogue returns both turns for both baselines") {
        Dialogue d = turns_of_lengths({2, 3});
        CHECK(lead3(d) == serialize_dialogue(d));
        CHECK(longest3(d) == serialize_dialogue(d));
    }
    SUBCASE("longest3 picks the three wordiest turns in original order") {
        Dialogue d = turns_of_lengths({5, 9, 2, 7});
        std::string got = longest3(d);
        Dialogue expect;
        expect.turns = {d.turns[0], d.turns[1], d.turns[3]};
        CHECK(got == serialize_dialogue(expect));
    }
    SUBCASE("lead3 takes the first three") {
        Dialogue d = turns_of_lengths({1, 1, 1, 9});
        Dialogue expect;
        expect.turns = {d.turns[0], d.turns[1], d.turns[2]};
        CHECK(lead3(d) == serialize_dialogue(expect));
    }
    SUBCASE("outputs are turn-substrings of the serialized dialogue") {
        Dialogue d = turns_of_lengths({4, 1, 6, 2, 8});
        std::string all = serialize_dialogue(d);
        for (const std::string& out : {lead3(d), longest3(d)})
            for (const auto& line : split_lines(out))
                CHECK(all.find(line) != std::string::npos);
    }
}

TEST_CASE("evaluate basics") {
    auto samples = make_toy_samples(5, 50);
    SUBCASE("candidates equal to references score 1 everywhere") {
        std::vector<std::string> cands;
        for (const auto& s : samples) cands.push_back(s.references.front());
        EvalReport r = evaluate(cands, samples);
        CHECK(r.corpus_mean.r1.f1 == doctest::Approx(1.0));
        CHECK(r.corpus_mean.r2.f1 == doctest::Approx(1.0));
        CHECK(r.corpus_mean.rl.f1 == doctest::Approx(1.0));
    }
    SUBCASE("corpus mean equals the mean of per-sample scores") {
        std::vector<std::string> cands;
        for (size_t i = 0; i < samples.size(); ++i)
            cands.push_back(i % 2 ? "nothing in common" : samples[i].references.front());
        EvalReport r = evaluate(cands, samples);
        double mean = 0.0;
        for (const auto& s : r.per_sample) mean += s.r2.f1;
        mean /= static_cast<double>(r.per_sample.size());
        CHECK(r.corpus_mean.r2.f1 == doctest::Approx(mean).epsilon(1e-12));
    }
    SUBCASE("misaligned lengths are rejected") {
        CHECK_THROWS_AS(evaluate({"a"}, samples), Error);
    }
    SUBCASE("multi-reference max rule") {
        Sample s = samples[0];
        s.references = {"completely different words", "the exact candidate text"};
        EvalReport r = evaluate({"the exact candidate text"}, {s});
        CHECK(r.corpus_mean.r1.f1 == doctest::Approx(1.0));
    }
    SUBCASE("single-sample passthrough of the rouge module") {
        Sample s;
        s.dialogue.id = "x";
        s.dialogue.turns = {{"A", "a b d words"}};
        s.references = {"a b d"};
        EvalReport r = evaluate({"a b c"}, {s});
        CHECK(r.corpus_mean.r1.f1 == doctest::Approx(2.0 / 3));
        CHECK(r.corpus_mean.r2.f1 == doctest::Approx(0.5));
    }
}

TEST_CASE("cr_buckets") {
    auto samples = make_toy_samples(6, 60);
    std::vector<std::string> cands;
    for (const auto& s : samples) cands.push_back(s.references.front());
    EvalReport r = evaluate(cands, samples);
    SUBCASE("one spanning bucket equals the corpus mean") {
        auto buckets = cr_buckets(r, {});
        REQUIRE(buckets.size() == 1);
        CHECK(buckets[0].n == samples.size());
        CHECK(buckets[0].mean_r2_f1 == doctest::Approx(r.corpus_mean.r2.f1));
    }
    SUBCASE("two singleton buckets split on an edge") {
        EvalReport two;
        two.per_sample = {r.per_sample[0], r.per_sample[1]};
        two.sample_cr = {0.1, 0.5};
        auto buckets = cr_buckets(two, {0.3});
        REQUIRE(buckets.size() == 2);
        CHECK(buckets[0].n == 1);
        CHECK(buckets[1].n == 1);
    }
    SUBCASE("empty buckets are omitted") {
        EvalReport one;
        one.per_sample = {r.per_sample[0]};
        one.sample_cr = {0.05};
        auto buckets = cr_buckets(one, {0.3, 0.6});
        REQUIRE(buckets.size() == 1);
        CHECK(buckets[0].n == 1);
    }
    SUBCASE("edges must strictly increase") {
        CHECK_THROWS_AS(cr_buckets(r, {0.3, 0.3}), Error);
    }
}

TEST_CASE("paired t-test") {
    SUBCASE("identical lists give p = 1") {
        CHECK(paired_ttest({1, 2, 3}, {1, 2, 3}) == doctest::Approx(1.0));
    }
    SUBCASE("constant nonzero differences give p = 0") {
        CHECK(paired_ttest({2, 3, 4, 5}, {1, 2, 3, 4}) == doctest::Approx(0.0));
    }
    SUBCASE("textbook case matches an independent quadrature oracle to 1e-6") {
        std::vector<double> a = {1, 2, 3, 4, 5};
        std::vector<double> b = {2, 2, 4, 4, 6};
        // t = -2.449489742783178 with 4 dof
        double expected = t_two_sided_p_quadrature(-2.449489742783178, 4);
        CHECK(paired_ttest(a, b) == doctest::Approx(expected).epsilon(1e-6));
    }
    SUBCASE("shift invariance") {
        std::vector<double> a = {0.3, 0.5, 0.9, 0.1, 0.7};
        std::vector<double> b = {0.2, 0.6, 0.8, 0.3, 0.6};
        std::vector<double> a2 = a, b2 = b;
        for (auto& x : a2) x += 10.0;
        for (auto& x : b2) x += 10.0;
        CHECK(paired_ttest(a, b) == doctest::Approx(paired_ttest(a2, b2)).epsilon(1e-12));
    }
    SUBCASE("length mismatch and tiny lists are rejected") {
        CHECK_THROWS_AS(paired_ttest({1, 2}, {1}), Error);
        CHECK_THROWS_AS(paired_ttest({1}, {1}), Error);
    }
    SUBCASE("agreement with quadrature across a range of t values") {
        for (double t : {0.5, 1.0, 1.7, 2.8}) {
            for (int df : {3, 9, 30}) {
                double mine = student_t_two_sided_p(t, df);
                double oracle = t_two_sided_p_quadrature(t, df);
                CHECK(mine == doctest::Approx(oracle).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("fleiss kappa") {
    SUBCASE("perfect agreement across two used categories is 1") {
        std::vector<std::vector<size_t>> counts = {{3, 0}, {0, 3}, {3, 0}};
        CHECK(fleiss_kappa(counts) == doctest::Approx(1.0));
    }
    SUBCASE("perfect agreement on a single category is 1 by convention") {
        std::vector<std::vector<size_t>> counts = {{3, 0}, {3, 0}};
        CHECK(fleiss_kappa(counts) == doctest::Approx(1.0));
    }
    SUBCASE("hand-evaluated 2x2 case") {
        // items {(A,A),(A,B)}: P1 = 1, P2 = 0, Pbar = 1/2, pe = 10/16
        std::vector<std::vector<size_t>> counts = {{2, 0}, {1, 1}};
        CHECK(fleiss_kappa(counts) == doctest::Approx(-1.0 / 3));
    }
    SUBCASE("uniform random ratings give kappa near 0") {
        std::mt19937_64 rng(123);
        std::vector<std::vector<size_t>> counts(10000, std::vector<size_t>(3, 0));
        std::uniform_int_distribution<size_t> cat(0, 2);
        for (auto& row : counts)
            for (int rater = 0; rater < 3; ++rater) ++row[cat(rng)];
        CHECK(std::abs(fleiss_kappa(counts)) < 0.05);
    }
    SUBCASE("relabeling categories leaves kappa unchanged") {
        std::vector<std::vector<size_t>> counts = {{2, 1, 0}, {0, 2, 1}, {1, 1, 1}, {3, 0, 0}};
        std::vector<std::vector<size_t>> relabeled;
        for (const auto& row : counts) relabeled.push_back({row[2], row[0], row[1]});
        CHECK(fleiss_kappa(counts) == doctest::Approx(fleiss_kappa(relabeled)));
    }
    SUBCASE("unequal rater counts are rejected") {
        std::vector<std::vector<size_t>> counts = {{2, 0}, {2, 1}};
        CHECK_THROWS_AS(fleiss_kappa(counts), Error);
    }
}

TEST_CASE("merge_error_flags truth table") {
    auto rec = [](bool mis, bool red, bool cor, bool rea) {
        HumanRecord r;
        r.mis = mis;
        r.red = red;
        r.cor = cor;
        r.rea = rea;
        return r;
    };
    CHECK(merge_error_flags(rec(false, false, false, false)) == std::pair{false, false});
    CHECK(merge_error_flags(rec(true, false, false, true)) == std::pair{true, true});
    CHECK(merge_error_flags(rec(false, true, true, false)) == std::pair{true, true});
    CHECK(merge_error_flags(rec(true, true, false, false)) == std::pair{true, false});
    CHECK(merge_error_flags(rec(false, false, true, false)) == std::pair{false, true});
    CHECK(merge_error_flags(rec(false, true, false, false)) == std::pair{true, false});
    CHECK(merge_error_flags(rec(false, false, false, true)) == std::pair{false, true});
    CHECK(merge_error_flags(rec(true, true, true, true)) == std::pair{true, true});
}

TEST_CASE("majority vote needs at least ceil(n/2) true flags") {
    CHECK(majority_vote({true, true, false}));
    CHECK_FALSE(majority_vote({true, false, false}));
    CHECK(majority_vote({true, true, false, false}));
    CHECK_FALSE(majority_vote({true, false, false, false}));
    CHECK_FALSE(majority_vote({false, false, false}));
}

TEST_CASE("human records parse and aggregate") {
    testing::TempDir dir("human");
    std::string lines =
        R"({"sample_id":"s1","annotator":"a1","score":2,"mis":false,"red":false,"cor":false,"rea":false})"
        "\n"
        R"({"sample_id":"s1","annotator":"a2","score":2,"mis":false,"red":true,"cor":false,"rea":false})"
        "\n"
        R"({"sample_id":"s2","annotator":"a1","score":0,"mis":true,"red":false,"cor":true,"rea":false})"
        "\n"
        R"({"sample_id":"s2","annotator":"a2","score":-2,"mis":true,"red":false,"cor":false,"rea":true})"
        "\n";
    auto path = dir.path() / "records.jsonl";
    write_file_atomic(path, lines);
    auto records = load_human_records(path);
    REQUIRE(records.size() == 4);
    double k = fleiss_kappa_records(records, 3, [](const HumanRecord& r) {
        return static_cast<size_t>(r.score == -2 ? 0 : (r.score == 0 ? 1 : 2));
    });
    CHECK(std::isfinite(k));
    SUBCASE("bad score is rejected") {
        write_file_atomic(path, R"({"sample_id":"s","annotator":"a","score":1})");
        CHECK_THROWS_AS(load_human_records(path), Error);
    }
}

TEST_CASE("reference_cr averages across references") {
    Sample s;
    s.dialogue.turns = {{"A", "one two three four"}};  // 5 serialized words
    s.references = {"a b", "a b c d"};
    CHECK(reference_cr(s) == doctest::Approx(3.0 / 5.0));
}
