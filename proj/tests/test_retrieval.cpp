#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "tarkit/corpus.hpp"
#include "tarkit/dictionary.hpp"
#include "tarkit/index.hpp"
#include "tarkit/retrieval.hpp"
#include "support/tmpdir.hpp"

using namespace tarkit;
using test_support::TempDir;

namespace {

Corpus three_doc_corpus() {
    Corpus c;
    c.add({"d1", "alpha beta gamma", ""});
    c.add({"d2", "delta epsilon zeta", ""});
    c.add({"d3", "eta theta iota", ""});
    return c;
}

Dictionary dict_of(std::vector<std::string> terms) {
    return Dictionary(std::move(terms), DictionaryConfig{});
}

}  // namespace

TEST_CASE("idf uses the smoothed positive form") {
    auto idx = build_index(three_doc_corpus(), dict_of({"alpha", "beta"}));
    // N = 3; df = 1 -> ln((3 - 1 + 0.5)/(1 + 0.5) + 1) = ln(8/3)
    REQUIRE(idx.idf("alpha") == Catch::Approx(std::log(8.0 / 3.0)).epsilon(1e-12));
    // unseen term: df = 0 -> ln(3.5/0.5 + 1) = ln(8)
    REQUIRE(idx.idf("nosuchterm") == Catch::Approx(std::log(8.0)).epsilon(1e-12));
    // df = N stays positive
    REQUIRE(idx.idf_for_df(3) == Catch::Approx(std::log(0.5 / 3.5 + 1.0)).epsilon(1e-12));
    REQUIRE(idx.idf_for_df(3) > 0);
}

TEST_CASE("bm25 equals idf when tf=1 and length equals the average") {
    // all three titles have 3 tokens, so len/avg = 1 and the saturation
    // term is (k1+1)/(1 + k1) = 1 exactly
    auto idx = build_index(three_doc_corpus(), dict_of({"alpha", "beta", "delta"}));
    std::vector<std::string> q = {"alpha"};
    double expected = std::log(8.0 / 3.0);  // ~0.9808
    REQUIRE(idx.bm25(q, "d1", Field::title) == Catch::Approx(expected).epsilon(1e-9));
    REQUIRE(idx.bm25(q, "d1", Field::title) == Catch::Approx(0.980829).margin(1e-6));
    // no occurrence scores zero
    REQUIRE(idx.bm25(q, "d2", Field::title) == 0.0);
    REQUIRE_THROWS_AS(idx.bm25(q, "missing", Field::title), Error);
}

TEST_CASE("duplicate query tokens count once") {
    auto idx = build_index(three_doc_corpus(), dict_of({"alpha"}));
    std::vector<std::string> once = {"alpha"};
    std::vector<std::string> twice = {"alpha", "alpha"};
    REQUIRE(idx.bm25(once, "d1", Field::title) == idx.bm25(twice, "d1", Field::title));
}

TEST_CASE("bm25 saturates in tf and discounts long fields") {
    Corpus c;
    c.add({"a", "t", "alpha beta gamma delta"});
    c.add({"b", "t", "alpha alpha beta gamma"});
    c.add({"c", "t", "alpha beta gamma delta epsilon zeta eta theta"});
    auto idx = build_index(c, dict_of({"alpha"}));
    std::vector<std::string> q = {"alpha"};
    double s1 = idx.bm25(q, "a", Field::abstract);
    double s2 = idx.bm25(q, "b", Field::abstract);
    double slong = idx.bm25(q, "c", Field::abstract);
    REQUIRE(s2 > s1);            // more occurrences, same length
    REQUIRE(slong < s1);         // same tf, double length
    // tf growth is bounded by idf * (k1 + 1)
    double idf = idx.idf_for_df(3);
    REQUIRE(s2 < idf * 2.2);
    // with b = 0 the length normalization disappears
    Bm25Params flat{1.2, 0.0};
    REQUIRE(idx.bm25(q, "a", Field::abstract, flat) ==
            Catch::Approx(idx.bm25(q, "c", Field::abstract, flat)));
}

TEST_CASE("per-field document frequencies drive per-field idf") {
    Corpus c;
    c.add({"a", "shared alpha", "shared beta"});
    c.add({"b", "gamma delta", "shared epsilon"});
    auto idx = build_index(c, dict_of({"shared"}));
    const TermPostings* tp = idx.postings("shared");
    REQUIRE(tp != nullptr);
    REQUIRE(tp->df(Field::title) == 1);
    REQUIRE(tp->df(Field::abstract) == 2);
    REQUIRE(tp->df(Field::both) == 2);
    std::vector<std::string> q = {"shared"};
    // title score for doc a uses df_title = 1; both fields have one 2-token
    // entry per doc so lengths equal averages
    REQUIRE(idx.bm25(q, "a", Field::title) == Catch::Approx(std::log(1.5 / 1.5 + 1.0)));
    REQUIRE(idx.bm25(q, "a", Field::abstract) == Catch::Approx(std::log(0.5 / 2.5 + 1.0)));
}

TEST_CASE("score_all matches the single-document scorer") {
    std::mt19937_64 rng(11);
    Corpus c;
    std::vector<std::string> vocab;
    for (int i = 0; i < 40; ++i) vocab.push_back("w" + std::to_string(i));
    auto sentence = [&](size_t n) {
        std::string s;
        std::uniform_int_distribution<size_t> pick(0, vocab.size() - 1);
        for (size_t i = 0; i < n; ++i) {
            if (!s.empty()) s += ' ';
            s += vocab[pick(rng)];
        }
        return s;
    };
    std::uniform_int_distribution<size_t> tlen(2, 6), alen(0, 30);
    for (int i = 0; i < 60; ++i)
        c.add({"doc" + std::to_string(i), sentence(tlen(rng)), sentence(alen(rng))});
    auto idx = build_index(c, dict_of(vocab));

    std::uniform_int_distribution<size_t> qlen(1, 5), pick(0, vocab.size() - 1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::string> q;
        for (size_t i = 0, n = qlen(rng); i < n; ++i) q.push_back(vocab[pick(rng)]);
        auto scored_vec = idx.score_all(q, Field::both);
        std::unordered_map<uint32_t, double> scored(scored_vec.begin(), scored_vec.end());
        for (uint32_t d = 0; d < idx.doc_count(); ++d) {
            double direct = idx.bm25_by_index(q, d, Field::both);
            auto it = scored.find(d);
            if (direct > 0) {
                REQUIRE(it != scored.end());
                REQUIRE(it->second == Catch::Approx(direct).epsilon(1e-12));
            } else {
                REQUIRE(it == scored.end());
            }
        }
    }
}

TEST_CASE("index round trips through its on-disk form exactly") {
    std::mt19937_64 rng(23);
    Corpus c;
    std::vector<std::string> vocab;
    for (int i = 0; i < 25; ++i) vocab.push_back("t" + std::to_string(i));
    std::uniform_int_distribution<size_t> pick(0, vocab.size() - 1), len(1, 15);
    for (int i = 0; i < 30; ++i) {
        std::string title = vocab[pick(rng)], abstract;
        for (size_t j = 0, n = len(rng); j < n; ++j) {
            if (!abstract.empty()) abstract += ' ';
            abstract += vocab[pick(rng)];
        }
        c.add({"doc" + std::to_string(i), title, abstract});
    }
    auto idx = build_index(c, dict_of(vocab));

    TempDir tmp;
    std::string path = tmp.file("corpus.idx");
    idx.save(path);
    auto loaded = InvertedIndex::load(path);

    REQUIRE(loaded.doc_count() == idx.doc_count());
    REQUIRE(loaded.doc_ids() == idx.doc_ids());
    REQUIRE(loaded.dictionary().terms() == idx.dictionary().terms());
    REQUIRE(loaded.dictionary().config().min_count == idx.dictionary().config().min_count);
    REQUIRE(loaded.avg_field_length(Field::both) == idx.avg_field_length(Field::both));
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<std::string> q = {vocab[pick(rng)], vocab[pick(rng)]};
        uint32_t d = static_cast<uint32_t>(pick(rng)) % idx.doc_count();
        for (Field f : {Field::title, Field::abstract, Field::both})
            REQUIRE(loaded.bm25_by_index(q, d, f) == idx.bm25_by_index(q, d, f));
    }
    REQUIRE_THROWS_AS(InvertedIndex::load(tmp.write("junk.idx", "not an index")), Error);
}

TEST_CASE("formulate_query keeps dictionary tokens in order with duplicates") {
    auto dict = dict_of({"alpha", "beta"});
    auto q = formulate_query("Beta! unknown alpha (beta)", dict);
    REQUIRE(q == std::vector<std::string>{"beta", "alpha", "beta"});
    REQUIRE(formulate_query("unknown words only", dict).empty());
}

TEST_CASE("retrieve_topk orders by score then doc_id and truncates") {
    Corpus c;
    c.add({"b", "alpha", ""});
    c.add({"a", "alpha", ""});
    c.add({"c", "alpha alpha", ""});
    c.add({"d", "beta", ""});
    auto idx = build_index(c, dict_of({"alpha", "beta"}));
    auto run = retrieve_topk({"alpha"}, idx, 100);
    REQUIRE(run.doc_ids() == std::vector<std::string>{"c", "a", "b"});  // tie a<b
    REQUIRE(run.entries[0].score > run.entries[1].score);
    REQUIRE(run.entries[1].score == run.entries[2].score);
    auto top2 = retrieve_topk({"alpha"}, idx, 2);
    REQUIRE(top2.doc_ids() == std::vector<std::string>{"c", "a"});
    REQUIRE(retrieve_topk({}, idx, 10).empty());
    REQUIRE(retrieve_topk({"oov"}, idx, 10).empty());
    REQUIRE_THROWS_AS(retrieve_topk({"alpha"}, idx, 0), Error);
}

TEST_CASE("score fusion min-max normalizes each list before summing") {
    RankedList a;
    a.topic_id = "T1";
    a.entries = {{"d1", 4.0}, {"d2", 2.0}};
    RankedList b;
    b.topic_id = "T1";
    b.entries = {{"d2", 10.0}};
    auto fused = fuse(a, b, 100, FusionMode::score);
    // d1: (4-2)/(4-2) = 1; d2: 0 from list a + 1.0 (single-entry list) = 1
    REQUIRE(fused.size() == 2);
    REQUIRE(fused.entries[0].doc_id == "d1");  // tie at 1.0, doc_id ascending
    REQUIRE(fused.entries[0].score == Catch::Approx(1.0));
    REQUIRE(fused.entries[1].doc_id == "d2");
    REQUIRE(fused.entries[1].score == Catch::Approx(1.0));
}

TEST_CASE("constant-score lists normalize to 1.0 everywhere") {
    RankedList a;
    a.topic_id = "T1";
    a.entries = {{"d1", 5.0}, {"d2", 5.0}, {"d3", 5.0}};
    RankedList empty;
    auto fused = fuse(a, empty, 100, FusionMode::score);
    for (const auto& e : fused.entries) REQUIRE(e.score == Catch::Approx(1.0));
}

TEST_CASE("rank fusion replaces scores with a linear rank decay") {
    RankedList a;
    a.topic_id = "T1";
    a.entries = {{"d1", 99.0}, {"d2", 1.0}, {"d3", 0.5}};
    RankedList b;
    b.topic_id = "T1";
    b.entries = {{"d3", 7.0}};
    auto fused = fuse(a, b, 100, FusionMode::rank);
    // a contributes d1=1, d2=0.5, d3=0; b contributes d3=1
    REQUIRE(fused.entries[0].doc_id == "d1");  // 1.0 ties with d3
    REQUIRE(fused.entries[0].score == Catch::Approx(1.0));
    REQUIRE(fused.entries[1].doc_id == "d3");
    REQUIRE(fused.entries[1].score == Catch::Approx(1.0));
    REQUIRE(fused.entries[2].doc_id == "d2");
    REQUIRE(fused.entries[2].score == Catch::Approx(0.5));
}

TEST_CASE("fusing two empty lists is an error") {
    RankedList a, b;
    a.topic_id = "T7";
    REQUIRE_THROWS_WITH(fuse(a, b, 10), Catch::Matchers::ContainsSubstring("T7"));
}

TEST_CASE("primary retrieval issues title and objectives as separate queries") {
    Corpus c;
    c.add({"A", "heart failure", "something else"});
    c.add({"B", "heart failure", "digoxin trial"});
    c.add({"C", "unrelated title", "digoxin trial"});
    c.add({"D", "unrelated title", "nothing relevant"});
    auto dict = dict_of({"heart", "failure", "digoxin", "trial"});
    auto idx = build_index(c, dict);

    Protocol p;
    p.topic_id = "T1";
    p.review_type = ReviewType::intervention;
    p.title = "heart failure";
    p.objectives = "digoxin trial";
    RetrievalConfig cfg;
    auto run = primary_retrieve(p, idx, dict, cfg);
    REQUIRE(run.topic_id == "T1");
    // B matches both queries and must rank first; D matches neither
    REQUIRE(run.entries[0].doc_id == "B");
    auto ids = run.doc_ids();
    REQUIRE(std::find(ids.begin(), ids.end(), "D") == ids.end());
    REQUIRE(ids.size() == 3);

    // one query out of vocabulary still works through the other
    Protocol only_title = p;
    only_title.objectives = "entirely unindexed words";
    REQUIRE_FALSE(primary_retrieve(only_title, idx, dict, cfg).empty());

    // both queries empty is a hard error
    Protocol hopeless = p;
    hopeless.title = "zzz";
    hopeless.objectives = "qqq";
    REQUIRE_THROWS_AS(primary_retrieve(hopeless, idx, dict, cfg), Error);

    // truncation via config.k
    RetrievalConfig two = cfg;
    two.k = 2;
    REQUIRE(primary_retrieve(p, idx, dict, two).size() == 2);
}
