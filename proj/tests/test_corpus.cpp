#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "tarkit/corpus.hpp"
#include "tarkit/dictionary.hpp"
#include "tarkit/text.hpp"
#include "support/tmpdir.hpp"

using namespace tarkit;

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
    auto tokens = tokenize("Hello, WORLD!  x2  (trial)");
    REQUIRE(tokens == std::vector<std::string>{"hello", "world", "x2", "trial"});
    REQUIRE(tokenize("").empty());
    REQUIRE(tokenize("...").empty());
}

TEST_CASE("bigrams pair adjacent tokens") {
    auto b = bigrams({"a", "b", "c"});
    REQUIRE(b == std::vector<std::string>{"a b", "b c"});
    REQUIRE(bigrams({"solo"}).empty());
}

TEST_CASE("corpus jsonl round trip") {
    test_support::TempDir tmp;
    std::string path = tmp.path() + "/corpus.jsonl";
    {
        std::ofstream os(path);
        os << R"({"doc_id":"d1","title":"Alpha Study","abstract":"about a thing"})" << "\n";
        os << R"({"doc_id":"d2","title":"Beta","abstract":""})" << "\n";
        os << "\n";  // blank lines are skipped
        os << R"({"doc_id":"d3","title":"Gamma","abstract":"only abstract"})" << "\n";
    }
    Corpus c = load_corpus_jsonl(path);
    REQUIRE(c.size() == 3);
    REQUIRE(c.by_id("d1").title == "Alpha Study");
    REQUIRE(c.by_id("d2").abstract.empty());
    REQUIRE(c.contains("d3"));
    REQUIRE_FALSE(c.contains("d4"));

    std::string out = tmp.path() + "/copy.jsonl";
    write_corpus_jsonl(c, out);
    Corpus c2 = load_corpus_jsonl(out);
    REQUIRE(c2.size() == 3);
    REQUIRE(c2.by_id("d3").abstract == "only abstract");
}

TEST_CASE("corpus rejects empty titles and ids") {
    Corpus c;
    REQUIRE_THROWS_AS(c.add({"", "title", ""}), Error);
    REQUIRE_THROWS_AS(c.add({"d1", "   ", ""}), Error);
    c.add({"d1", "ok", ""});
    REQUIRE(c.size() == 1);
}

TEST_CASE("corpus rejects duplicates and bad lines") {
    test_support::TempDir tmp;
    std::string path = tmp.path() + "/bad.jsonl";
    {
        std::ofstream os(path);
        os << R"({"doc_id":"d1","title":"t","abstract":"a"})" << "\n";
        os << R"({"doc_id":"d1","title":"t2","abstract":"a2"})" << "\n";
    }
    REQUIRE_THROWS_AS(load_corpus_jsonl(path), Error);

    std::string garbled = tmp.path() + "/garbled.jsonl";
    {
        std::ofstream os(garbled);
        os << "not json\n";
    }
    REQUIRE_THROWS_AS(load_corpus_jsonl(garbled), Error);
    REQUIRE_THROWS_AS(load_corpus_jsonl(tmp.path() + "/missing.jsonl"), Error);
}

TEST_CASE("dictionary drops frequent, rare, and overflow terms") {
    // 20 docs: "common" in every doc (df ratio 1.0 > 0.5);
    // "mid" in 12 docs (count 12 >= 10, ratio 0.6 > 0.5 -> dropped);
    // "good" in 10 docs (ratio 0.5 allowed, count 10 allowed);
    // "rare" in 9 docs (count 9 < 10 -> dropped).
    Corpus corpus;
    for (int i = 0; i < 20; ++i) {
        Document d;
        d.doc_id = "d" + std::to_string(i);
        d.title = "common";
        std::string abs;
        if (i < 12) abs += " mid";
        if (i < 10) abs += " good";
        if (i < 9) abs += " rare";
        d.abstract = abs;
        corpus.add(d);
    }
    Dictionary dict = build_dictionary(corpus);
    REQUIRE(dict.contains("good"));
    REQUIRE_FALSE(dict.contains("common"));
    REQUIRE_FALSE(dict.contains("mid"));
    REQUIRE_FALSE(dict.contains("rare"));
}

TEST_CASE("dictionary keeps most frequent terms under the cap, ties by term") {
    Corpus corpus;
    // "aaa" and "bbb" appear 12 times each, "ccc" 11 times, spread over docs
    // so none exceeds the df ratio.
    for (int i = 0; i < 24; ++i) {
        Document d;
        d.doc_id = "d" + std::to_string(i);
        std::string text;
        if (i < 12) text += "aaa ";
        else text += "bbb ";
        if (i % 2 == 0 && i < 22) text += "ccc";
        d.title = text;
        d.abstract = "";
        corpus.add(d);
    }
    DictionaryConfig config;
    config.max_terms = 2;
    Dictionary dict = build_dictionary(corpus, config);
    REQUIRE(dict.size() == 2);
    REQUIRE(dict.contains("aaa"));
    REQUIRE(dict.contains("bbb"));
    REQUIRE_FALSE(dict.contains("ccc"));
}
