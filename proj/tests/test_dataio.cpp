#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "tarkit/embeddings.hpp"
#include "tarkit/protocol.hpp"
#include "tarkit/qrels.hpp"
#include "tarkit/run_file.hpp"
#include "tarkit/trace.hpp"
#include "support/tmpdir.hpp"

using namespace tarkit;
using test_support::TempDir;

TEST_CASE("protocol field admissibility follows the review type") {
    // indices: 0 title, 1 objectives, 2 studies, 3 participants, 4 index
    // tests, 5 target conditions, 6 reference standards, 7 intervention,
    // 8 outcome measures
    for (size_t i = 0; i < 4; ++i) {
        REQUIRE(Protocol::field_allowed(ReviewType::dta, i));
        REQUIRE(Protocol::field_allowed(ReviewType::intervention, i));
        REQUIRE(Protocol::field_allowed(ReviewType::prognosis, i));
        REQUIRE(Protocol::field_allowed(ReviewType::qualitative, i));
    }
    REQUIRE(Protocol::field_allowed(ReviewType::dta, 4));
    REQUIRE(Protocol::field_allowed(ReviewType::dta, 5));
    REQUIRE(Protocol::field_allowed(ReviewType::dta, 6));
    REQUIRE_FALSE(Protocol::field_allowed(ReviewType::dta, 7));
    REQUIRE_FALSE(Protocol::field_allowed(ReviewType::dta, 8));
    REQUIRE_FALSE(Protocol::field_allowed(ReviewType::intervention, 4));
    REQUIRE(Protocol::field_allowed(ReviewType::intervention, 7));
    REQUIRE(Protocol::field_allowed(ReviewType::intervention, 8));
    REQUIRE_FALSE(Protocol::field_allowed(ReviewType::prognosis, 7));
    REQUIRE(Protocol::field_allowed(ReviewType::prognosis, 8));
    for (size_t i = 4; i < 9; ++i) REQUIRE_FALSE(Protocol::field_allowed(ReviewType::qualitative, i));
}

TEST_CASE("protocol validation enforces required fields and admissibility") {
    Protocol p;
    p.topic_id = "T1";
    p.review_type = ReviewType::qualitative;
    p.title = "a title";
    REQUIRE_THROWS_AS(validate_protocol(p), Error);  // objectives missing
    p.objectives = "stated aims";
    REQUIRE_NOTHROW(validate_protocol(p));
    p.index_tests = "not allowed for qualitative";
    REQUIRE_THROWS_AS(validate_protocol(p), Error);
}

TEST_CASE("protocol jsonl round trip preserves fields") {
    TempDir tmp;
    Protocol p;
    p.topic_id = "CD001";
    p.review_type = ReviewType::dta;
    p.title = "Sensitivity of test X";
    p.objectives = "to assess X in adults";
    p.types_of_studies = "cross sectional";
    p.types_of_participants = "adults";
    p.index_tests = "X assay";
    p.target_conditions = "disease Y";
    p.reference_standards = "biopsy";
    std::string path = tmp.file("protocols.jsonl");
    {
        std::ofstream os(path);
        os << protocol_to_json(p).dump() << "\n";
    }
    auto loaded = load_protocols_jsonl(path);
    REQUIRE(loaded.size() == 1);
    const Protocol& q = loaded.at("CD001");
    REQUIRE(q.review_type == ReviewType::dta);
    REQUIRE(q.title == p.title);
    REQUIRE(q.reference_standards == "biopsy");
    REQUIRE(q.types_of_intervention.empty());
    REQUIRE(q.seed_text() == "Sensitivity of test X to assess X in adults");
}

TEST_CASE("protocol loader rejects duplicates, bad types, missing type") {
    TempDir tmp;
    std::string dup = tmp.write(
        "dup.jsonl",
        R"({"topic_id":"T1","review_type":"DTA","title":"t","objectives":"o"})"
        "\n"
        R"({"topic_id":"T1","review_type":"DTA","title":"t","objectives":"o"})"
        "\n");
    REQUIRE_THROWS_AS(load_protocols_jsonl(dup), Error);
    std::string bad = tmp.write(
        "bad.jsonl", R"({"topic_id":"T1","review_type":"Umbrella","title":"t","objectives":"o"})"
                     "\n");
    REQUIRE_THROWS_AS(load_protocols_jsonl(bad), Error);
    std::string missing =
        tmp.write("missing.jsonl", R"({"topic_id":"T1","title":"t","objectives":"o"})"
                                   "\n");
    REQUIRE_THROWS_AS(load_protocols_jsonl(missing), Error);
}

TEST_CASE("qrels load, labels, and round trip") {
    TempDir tmp;
    std::string path = tmp.write("q.txt",
                                 "T1 0 d1 1\n"
                                 "T1 0 d2 0\n"
                                 "\n"
                                 "T2 0 d1 0\n");
    Qrels q = load_qrels(path);
    REQUIRE(q.topic_count() == 2);
    REQUIRE(q.label("T1", "d1") == 1);
    REQUIRE(q.label("T1", "d2") == 0);
    REQUIRE(q.label("T1", "unjudged") == 0);
    REQUIRE(q.relevant_count("T1") == 1);
    REQUIRE_THROWS_AS(q.labels("T9"), Error);

    std::string out = tmp.file("copy.txt");
    write_qrels(q, out);
    Qrels q2 = load_qrels(out);
    REQUIRE(q2.label("T2", "d1") == 0);
    REQUIRE(q2.topic_count() == 2);
}

TEST_CASE("qrels loader rejects malformed lines") {
    TempDir tmp;
    REQUIRE_THROWS_AS(load_qrels(tmp.write("a.txt", "T1 0 d1\n")), Error);
    REQUIRE_THROWS_AS(load_qrels(tmp.write("b.txt", "T1 0 d1 1 extra\n")), Error);
    REQUIRE_THROWS_AS(load_qrels(tmp.write("c.txt", "T1 0 d1 maybe\n")), Error);
    REQUIRE_THROWS_AS(load_qrels(tmp.write("d.txt", "T1 0 d1 1\nT1 0 d1 0\n")), Error);
}

TEST_CASE("run file round trip preserves order and scores") {
    TempDir tmp;
    RankedList a;
    a.topic_id = "T1";
    a.entries = {{"d2", 3.25}, {"d7", 1.5}, {"d1", 0.125}};
    RankedList b;
    b.topic_id = "T2";
    b.entries = {{"d9", 10.0}};
    std::string path = tmp.file("run.txt");
    write_run_file({a, b}, path, "testtag");
    auto loaded = load_run_file(path);
    REQUIRE(loaded.size() == 2);
    REQUIRE(loaded[0].topic_id == "T1");
    REQUIRE(loaded[0].doc_ids() == std::vector<std::string>{"d2", "d7", "d1"});
    REQUIRE(loaded[0].entries[0].score == 3.25);
    REQUIRE(loaded[1].entries[0].doc_id == "d9");
}

TEST_CASE("run file loader validates rank sequence") {
    TempDir tmp;
    std::string bad = tmp.write("bad.run",
                                "T1 Q0 d1 1 2.0 tag\n"
                                "T1 Q0 d2 3 1.0 tag\n");  // rank gap
    REQUIRE_THROWS_AS(load_run_file(bad), Error);
    std::string short_line = tmp.write("short.run", "T1 Q0 d1 1\n");
    REQUIRE_THROWS_AS(load_run_file(short_line), Error);
}

TEST_CASE("trace csv round trip") {
    TempDir tmp;
    std::vector<TraceRow> rows = {{"T1", 0, "d1", 0, 1, 0},
                                  {"T1", 1, "d2", 1, 2, 5},
                                  {"T1", 2, "d3", 0, 3, 10}};
    std::string path = tmp.file("trace.csv");
    write_trace_csv(rows, path);
    {
        std::ifstream is(path);
        std::string header;
        std::getline(is, header);
        REQUIRE(header == "topic,step,doc_id,label,judged,batch");
    }
    auto loaded = load_trace_csv(path);
    REQUIRE(loaded.size() == 3);
    REQUIRE(loaded[1].doc_id == "d2");
    REQUIRE(loaded[1].label == 1);
    REQUIRE(loaded[2].batch == 10);
    REQUIRE_THROWS_AS(load_trace_csv(tmp.write("bad.csv", "nope\n")), Error);
}

TEST_CASE("embeddings load and sentence averaging") {
    TempDir tmp;
    std::string path = tmp.write("emb.txt",
                                 "3 2\n"
                                 "cat 1.0 0.0\n"
                                 "dog 0.0 1.0\n"
                                 "rat 1.0 1.0\n");
    Embeddings emb = load_embeddings_text(path);
    REQUIRE(emb.dim() == 2);
    REQUIRE(emb.size() == 3);
    REQUIRE(emb.contains("cat"));
    REQUIRE_FALSE(emb.contains("cow"));

    auto v = sentence_embedding({"cat", "dog"}, emb);
    REQUIRE(v[0] == Catch::Approx(0.5));
    REQUIRE(v[1] == Catch::Approx(0.5));
    // repeated tokens weigh per occurrence
    auto w = sentence_embedding({"cat", "cat", "dog"}, emb);
    REQUIRE(w[0] == Catch::Approx(2.0 / 3));
    // out-of-vocabulary tokens are ignored; all-OOV gives the zero vector
    auto z = sentence_embedding({"cow"}, emb);
    REQUIRE(z == std::vector<double>{0.0, 0.0});
}

TEST_CASE("embeddings loader rejects malformed input") {
    TempDir tmp;
    REQUIRE_THROWS_AS(load_embeddings_text(tmp.write("a.txt", "2 2\ncat 1 0\n")), Error);
    REQUIRE_THROWS_AS(load_embeddings_text(tmp.write("b.txt", "1 2\ncat 1\n")), Error);
    REQUIRE_THROWS_AS(load_embeddings_text(tmp.write("c.txt", "1 2\ncat 1 0\ncat 1 0\n")), Error);
    REQUIRE_THROWS_AS(load_embeddings_text(tmp.write("d.txt", "\n")), Error);
}
