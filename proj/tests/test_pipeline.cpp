#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "tarkit/pipeline.hpp"
#include "support/synthetic.hpp"
#include "support/tmpdir.hpp"

using namespace tarkit;
namespace fs = std::filesystem;

namespace {

test_support::BenchmarkSpec small_spec() {
    test_support::BenchmarkSpec spec;
    spec.n_docs = 240;
    spec.n_topics = 4;
    spec.relevant_per_topic = 8;
    spec.hard_per_topic = 2;
    spec.judged_irrelevant_per_topic = 30;
    spec.dim = 8;
    spec.background_words = 60;
    spec.noise_words = 240;
    spec.seed = 11;
    return spec;
}

PipelineConfig small_config(const std::string& data_dir, const std::string& out_dir) {
    PipelineConfig c;
    c.corpus_path = data_dir + "/corpus.jsonl";
    c.protocols_path = data_dir + "/protocols.jsonl";
    c.qrels_path = data_dir + "/qrels.txt";
    c.embeddings_path = data_dir + "/embeddings.txt";
    c.out_dir = out_dir;
    c.dictionary.min_count = 1;
    c.svd_rank = 6;
    c.ltr.n_trees = 10;
    c.ltr.max_depth = 3;
    c.feedback.k = 2;
    c.feedback.s_init = 2;
    c.feedback.t_init = 10;
    c.feedback.s_final = 20;
    c.feedback.t_final = 0;
    c.thresholds = {5, 5000};
    c.workers = 2;
    return c;
}

}  // namespace

TEST_CASE("config files parse every section and reject unknown keys") {
    nlohmann::json j = {
        {"corpus", "c.jsonl"},
        {"protocols", "p.jsonl"},
        {"qrels", "q.txt"},
        {"embeddings", "e.txt"},
        {"sentence_embeddings", "s.txt"},
        {"out_dir", "results"},
        {"cache_dir", "warm"},
        {"dictionary", {{"max_terms", 500}, {"max_doc_freq_ratio", 0.4}, {"min_count", 2}}},
        {"bm25", {{"k1", 1.6}, {"b", 0.6}}},
        {"retrieval", {{"k", 250}, {"fusion", "rank"}}},
        {"features", {{"svd_rank", 32}, {"wmd_max_tokens", 12}}},
        {"ltr",
         {{"trees", 50},
          {"learning_rate", 0.05},
          {"max_depth", 4},
          {"min_child_rows", 3},
          {"judged_only", false}}},
        {"feedback", {{"k", 3}, {"s_init", 2}, {"t_init", 20}, {"s_final", 40}, {"t_final", 600}}},
        {"svm", {{"c", 0.25}, {"tolerance", 0.01}, {"max_epochs", 200}}},
        {"representation", "tfidf"},
        {"autotar", {{"enabled", true}, {"budget", 77}, {"negatives", 50}}},
        {"thresholds", {3, 7}},
        {"workers", 3},
        {"seed", 99},
    };
    PipelineConfig c = pipeline_config_from_json(j);
    CHECK(c.corpus_path == "c.jsonl");
    CHECK(c.sentence_embeddings_path == "s.txt");
    CHECK(c.sentence_path() == "s.txt");
    CHECK(c.cache_path() == "warm");
    CHECK(c.dictionary.max_terms == 500);
    CHECK(c.dictionary.max_doc_freq_ratio == Catch::Approx(0.4));
    CHECK(c.bm25.k1 == Catch::Approx(1.6));
    CHECK(c.retrieval_k == 250);
    CHECK(c.fusion == FusionMode::rank);
    CHECK(c.svd_rank == 32);
    CHECK(c.wmd.max_tokens_per_side == 12);
    CHECK(c.ltr.n_trees == 50);
    CHECK(c.ltr_judged_only == false);
    CHECK(c.feedback.t_final == 600);
    CHECK(c.svm.c == Catch::Approx(0.25));
    CHECK(c.representation == "tfidf");
    CHECK(c.autotar_enabled);
    CHECK(c.autotar_budget == 77);
    CHECK(c.autotar_negatives == 50);
    CHECK(c.thresholds == std::vector<size_t>{3, 7});
    CHECK(c.workers == 3);
    CHECK(c.seed == 99);

    CHECK_THROWS_WITH(pipeline_config_from_json({{"corups", "x"}}),
                      Catch::Matchers::ContainsSubstring("unknown config key") &&
                          Catch::Matchers::ContainsSubstring("corups"));
    CHECK_THROWS_WITH(pipeline_config_from_json({{"ltr", {{"depth", 4}}}}),
                      Catch::Matchers::ContainsSubstring("ltr"));
    CHECK_THROWS_WITH(pipeline_config_from_json({{"dictionary", {{"stopwords", true}}}}),
                      Catch::Matchers::ContainsSubstring("dictionary"));
    CHECK_THROWS_WITH(pipeline_config_from_json({{"representation", "sparse"}}),
                      Catch::Matchers::ContainsSubstring("representation"));

    // empty sentence path falls back to the word embeddings
    PipelineConfig d = pipeline_config_from_json({{"embeddings", "w.txt"}});
    CHECK(d.sentence_path() == "w.txt");
    CHECK(d.cache_path() == "out/cache");
}

TEST_CASE("config loading reports file and JSON problems") {
    test_support::TempDir tmp;
    CHECK_THROWS_WITH(load_pipeline_config(tmp.file("absent.json")),
                      Catch::Matchers::ContainsSubstring("cannot open"));
    auto bad = tmp.write("bad.json", "{not json");
    CHECK_THROWS_WITH(load_pipeline_config(bad), Catch::Matchers::ContainsSubstring("invalid JSON"));
    auto good = tmp.write("good.json", R"({"seed": 5})");
    CHECK(load_pipeline_config(good).seed == 5);
}

TEST_CASE("artifact preparation validates inputs and flags rank reduction") {
    test_support::TempDir tmp;
    auto b = test_support::make_benchmark(small_spec());
    auto dir = tmp.file("data");
    test_support::write_benchmark(b, dir);

    PipelineConfig missing = small_config(dir, tmp.file("out"));
    missing.corpus_path.clear();
    CHECK_THROWS_WITH(prepare_pipeline(missing),
                      Catch::Matchers::ContainsSubstring("missing corpus path"));

    PipelineConfig absent = small_config(dir, tmp.file("out"));
    absent.qrels_path = dir + "/nope.txt";
    CHECK_THROWS_WITH(prepare_pipeline(absent),
                      Catch::Matchers::ContainsSubstring("qrels file not found"));

    PipelineConfig big_rank = small_config(dir, tmp.file("out"));
    big_rank.svd_rank = 100000;  // larger than the matrix: clamped with a warning
    std::vector<std::string> warnings;
    auto artifacts = prepare_pipeline(big_rank, &warnings);
    REQUIRE(artifacts->corpus.size() == 240);
    REQUIRE_FALSE(warnings.empty());
    CHECK(warnings.front().find("svd rank reduced") != std::string::npos);
    CHECK(artifacts->sentence_embeddings == &artifacts->word_embeddings);
    CHECK(artifacts->content_hash != 0);
}

TEST_CASE("an end-to-end run produces ranked stages, reports, and a clean audit") {
    test_support::TempDir tmp;
    auto b = test_support::make_benchmark(small_spec());
    auto dir = tmp.file("data");
    test_support::write_benchmark(b, dir);
    PipelineConfig config = small_config(dir, tmp.file("out"));

    PipelineResult result = run_pipeline(config);

    const size_t n_topics = b.protocols.size();
    REQUIRE(result.runs.initial.size() == n_topics);
    REQUIRE(result.runs.inter.size() == n_topics);
    REQUIRE(result.runs.intra.size() == n_topics);
    CHECK(result.runs.autotar.empty());
    CHECK_FALSE(result.autotar_report.has_value());

    // every stage reaches full recall eventually: threshold 5000 covers the list
    CHECK(result.initial_report.macro_recall.at(5000) == Catch::Approx(1.0));
    CHECK(result.inter_report.macro_recall.at(5000) == Catch::Approx(1.0));
    CHECK(result.intra_report.macro_recall.at(5000) == Catch::Approx(1.0));
    CHECK(result.initial_report.skipped_topics.empty());

    // the reranking stages permute stage-1 candidates, never change the set
    for (size_t i = 0; i < n_topics; ++i) {
        auto sorted_ids = [](const RankedList& r) {
            auto ids = r.doc_ids();
            std::sort(ids.begin(), ids.end());
            return ids;
        };
        CHECK(sorted_ids(result.runs.inter[i]) == sorted_ids(result.runs.initial[i]));
        CHECK(sorted_ids(result.runs.intra[i]) == sorted_ids(result.runs.initial[i]));
    }

    // leave-one-out audit: every model trained on everyone but the held-out
    REQUIRE(result.audit.leak_free());
    REQUIRE(result.audit.trained_on.size() == n_topics);
    for (const auto& [held_out, trained] : result.audit.trained_on) {
        CHECK(trained.size() == n_topics - 1);
        CHECK_FALSE(trained.count(held_out));
    }

    // artifacts on disk
    for (const auto& [topic, p] : b.protocols) {
        CHECK(fs::exists(config.out_dir + "/runs/" + topic + ".initial.run"));
        CHECK(fs::exists(config.out_dir + "/runs/" + topic + ".inter.run"));
        CHECK(fs::exists(config.out_dir + "/runs/" + topic + ".intra.run"));
        CHECK(fs::exists(config.out_dir + "/traces/" + topic + ".intra.csv"));
        auto trace = load_trace_csv(config.out_dir + "/traces/" + topic + ".intra.csv");
        CHECK_FALSE(trace.empty());
        CHECK(trace.front().topic_id == topic);
    }
    REQUIRE(fs::exists(config.out_dir + "/report.json"));
    std::ifstream is(config.out_dir + "/report.json");
    nlohmann::json report;
    is >> report;
    CHECK(report.contains("initial"));
    CHECK(report.contains("inter"));
    CHECK(report.contains("intra"));
    CHECK_FALSE(report.contains("autotar"));
    for (const auto& [topic, p] : b.protocols)
        CHECK(report["audit"][topic]["held_out_excluded"].get<bool>());

    REQUIRE(fs::exists(config.out_dir + "/comparison.csv"));
    std::ifstream cs(config.out_dir + "/comparison.csv");
    std::string header;
    REQUIRE(std::getline(cs, header));
    CHECK(header == "system,recall@5,recall@5000,map,wss@100,last_rel");
    size_t rows = 0;
    for (std::string line; std::getline(cs, line);)
        if (!line.empty()) ++rows;
    CHECK(rows == 3);  // initial, inter, intra

    // a fresh run over the same inputs hits the feature cache and reproduces
    // the rankings exactly
    CHECK(result.feature_cache_hits == 0);
    CHECK(result.feature_cache_misses == n_topics);
    PipelineResult again = run_pipeline(config);
    CHECK(again.feature_cache_hits == n_topics);
    CHECK(again.feature_cache_misses == 0);
    for (size_t i = 0; i < n_topics; ++i) {
        CHECK(again.runs.inter[i].doc_ids() == result.runs.inter[i].doc_ids());
        CHECK(again.runs.intra[i].doc_ids() == result.runs.intra[i].doc_ids());
    }

    // scoring-parameter changes invalidate the cache; unrelated ones reuse it
    PipelineConfig hotter = config;
    hotter.bm25.k1 = 1.6;
    CHECK(run_pipeline(hotter).feature_cache_misses == n_topics);
    PipelineConfig reth = config;
    reth.thresholds = {2, 9000};
    CHECK(run_pipeline(reth).feature_cache_hits == n_topics);
}

TEST_CASE("autotar runs alongside screening when enabled") {
    test_support::TempDir tmp;
    auto spec = small_spec();
    spec.n_docs = 150;
    spec.n_topics = 2;
    spec.judged_irrelevant_per_topic = 20;
    auto b = test_support::make_benchmark(spec);
    auto dir = tmp.file("data");
    test_support::write_benchmark(b, dir);

    PipelineConfig config = small_config(dir, tmp.file("out"));
    config.autotar_enabled = true;
    config.autotar_budget = 60;

    PipelineResult result = run_pipeline(config);
    REQUIRE(result.autotar_report.has_value());
    REQUIRE(result.runs.autotar.size() == 2);
    for (const auto& run : result.runs.autotar) {
        CHECK(run.size() > 0);
        CHECK(fs::exists(config.out_dir + "/runs/" + run.topic_id + ".autotar.run"));
        CHECK(fs::exists(config.out_dir + "/traces/" + run.topic_id + ".autotar.csv"));
        CHECK(result.autotar_traces.at(run.topic_id).size() == 60);
    }
    std::ifstream is(config.out_dir + "/report.json");
    nlohmann::json report;
    is >> report;
    CHECK(report.contains("autotar"));
    std::ifstream cs(config.out_dir + "/comparison.csv");
    std::string text((std::istreambuf_iterator<char>(cs)), std::istreambuf_iterator<char>());
    CHECK(text.find("autotar") != std::string::npos);
}

TEST_CASE("a single-topic collection cannot be cross-validated") {
    test_support::TempDir tmp;
    auto spec = small_spec();
    spec.n_docs = 120;
    spec.n_topics = 2;
    auto b = test_support::make_benchmark(spec);
    auto dir = tmp.file("data");
    test_support::write_benchmark(b, dir);

    // keep only the first protocol line
    std::string first;
    {
        std::ifstream is(dir + "/protocols.jsonl");
        std::getline(is, first);
    }
    tmp.write("data/protocols.jsonl", first + "\n");

    PipelineConfig config = small_config(dir, tmp.file("out"));
    CHECK_THROWS_WITH(run_pipeline(config),
                      Catch::Matchers::ContainsSubstring("at least 2 topics"));
}

TEST_CASE("threshold sweeps rerun screening over shared earlier stages") {
    test_support::TempDir tmp;
    auto spec = small_spec();
    spec.n_docs = 150;
    spec.n_topics = 2;
    spec.judged_irrelevant_per_topic = 20;
    auto b = test_support::make_benchmark(spec);
    auto dir = tmp.file("data");
    test_support::write_benchmark(b, dir);
    PipelineConfig config = small_config(dir, tmp.file("out"));

    std::vector<std::pair<size_t, size_t>> grid = {{10, 80}, {10, 0}};
    auto rows = sweep_thresholds(config, grid);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].t_init == 10);
    CHECK(rows[0].t_final == 80);
    CHECK(rows[1].t_final == 0);
    // an uncapped sweep cell reaches full recall
    CHECK(rows[1].report.macro_recall.at(5000) == Catch::Approx(1.0));
    // a capped one can stop early, never exceeding the cap's recall
    CHECK(rows[0].report.macro_recall.at(5000) <= 1.0 + 1e-12);

    auto csv = sweep_to_csv(rows);
    std::istringstream is(csv);
    std::string header;
    REQUIRE(std::getline(is, header));
    CHECK(header == "t_init,t_final,recall@5,recall@5000,map,wss@100,last_rel");
    size_t data = 0;
    for (std::string line; std::getline(is, line);)
        if (!line.empty()) ++data;
    CHECK(data == 2);

    CHECK_THROWS_AS(sweep_thresholds(config, {}), Error);
}
