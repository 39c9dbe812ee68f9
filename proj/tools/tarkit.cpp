// tarkit — command-line front end for the screening toolkit.
//
// Subcommands: index build, retrieve, features extract, ltr train|rank|importance,
// simulate, evaluate, curve, pipeline run, sweep, serve.
// Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <csignal>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tarkit/tarkit.hpp"

namespace fs = std::filesystem;
using tarkit::fail;

namespace {

// ---------------------------------------------------------------- helpers

/// Seed flag plumbing: every random choice in a subcommand flows from one
/// seed; when the user leaves it unset we draw one and log it for replay.
struct SeedOption {
    int64_t raw = -1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--seed", raw, "random seed (unset: draw one and log it)");
    }

    uint64_t resolve() const {
        if (raw >= 0) return static_cast<uint64_t>(raw);
        uint64_t drawn = std::random_device{}();
        std::cerr << "seed: " << drawn << "\n";
        return drawn;
    }
};

tarkit::Protocol select_protocol(const std::string& path, const std::string& topic_id) {
    auto protocols = tarkit::load_protocols_jsonl(path);
    if (protocols.empty()) fail("no protocols in " + path);
    if (topic_id.empty()) {
        if (protocols.size() > 1)
            fail(path + " holds " + std::to_string(protocols.size()) +
                 " protocols; pick one with --topic");
        return protocols.begin()->second;
    }
    auto it = protocols.find(topic_id);
    if (it == protocols.end()) fail("topic " + topic_id + " not found in " + path);
    return it->second;
}

tarkit::RankedList select_run(const std::string& path, const std::string& topic_id) {
    auto runs = tarkit::load_run_file(path);
    if (topic_id.empty()) {
        if (runs.size() > 1)
            fail(path + " holds " + std::to_string(runs.size()) +
                 " topics; pick one with --topic");
        return std::move(runs.front());
    }
    for (auto& run : runs)
        if (run.topic_id == topic_id) return std::move(run);
    fail("topic " + topic_id + " not found in " + path);
}

/// "k=10,s_init=1,t_init=200,s_final=50,t_final=1000" → FeedbackParams.
tarkit::FeedbackParams parse_feedback_params(const std::string& text) {
    tarkit::FeedbackParams p;
    if (text.empty()) return p;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) fail("bad --params entry (want key=value): " + item);
        std::string key = tarkit::trim(item.substr(0, eq));
        std::string value = tarkit::trim(item.substr(eq + 1));
        size_t parsed = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(value, &parsed);
        } catch (const std::exception&) {
            fail("bad --params value for " + key + ": " + value);
        }
        if (parsed != value.size()) fail("bad --params value for " + key + ": " + value);
        if (key == "k") p.k = v;
        else if (key == "s_init") p.s_init = v;
        else if (key == "t_init") p.t_init = v;
        else if (key == "s_final") p.s_final = v;
        else if (key == "t_final") p.t_final = v;
        else fail("unknown --params key: " + key);
    }
    return p;
}

/// "200:500,200:1000" → {(200,500), (200,1000)}.
std::vector<std::pair<size_t, size_t>> parse_grid(const std::string& text) {
    std::vector<std::pair<size_t, size_t>> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos) fail("bad --grid entry (want t_init:t_final): " + item);
        try {
            grid.emplace_back(std::stoull(item.substr(0, colon)),
                              std::stoull(item.substr(colon + 1)));
        } catch (const std::exception&) {
            fail("bad --grid entry: " + item);
        }
    }
    if (grid.empty()) fail("--grid is empty");
    return grid;
}

/// Builds classifier document vectors for the chosen representation.
tarkit::DocVectors make_doc_vectors(const tarkit::Corpus& corpus,
                                    const std::string& representation,
                                    const std::string& embeddings_path) {
    if (representation == "tfidf") {
        auto dict = tarkit::build_dictionary(corpus);
        auto index = tarkit::build_index(corpus, dict);
        auto vectorizer = tarkit::TfIdfVectorizer::fit(index);
        return tarkit::build_tfidf_vectors(corpus, vectorizer);
    }
    if (representation != "embedding")
        fail("unknown representation: " + representation + " (expected embedding|tfidf)");
    auto emb = tarkit::load_embeddings_text(embeddings_path);
    return tarkit::build_sentence_vectors(corpus, emb);
}

// ------------------------------------------------------------- subcommands

struct IndexBuildArgs {
    std::string corpus, out;
    tarkit::DictionaryConfig dict;
};

int run_index_build(const IndexBuildArgs& a) {
    auto corpus = tarkit::load_corpus_jsonl(a.corpus);
    auto dict = tarkit::build_dictionary(corpus, a.dict);
    auto index = tarkit::build_index(corpus, dict);
    index.save(a.out);
    std::cerr << "indexed " << index.doc_count() << " documents, " << dict.size()
              << " dictionary terms -> " << a.out << "\n";
    return 0;
}

struct RetrieveArgs {
    std::string index, protocol, topic, out, fusion = "score";
    size_t k = 100000;
    tarkit::Bm25Params bm25;
};

int run_retrieve(const RetrieveArgs& a) {
    auto index = tarkit::InvertedIndex::load(a.index);
    auto protocols = tarkit::load_protocols_jsonl(a.protocol);
    if (protocols.empty()) fail("no protocols in " + a.protocol);
    tarkit::RetrievalConfig config;
    config.k = a.k;
    config.fusion = tarkit::fusion_mode_from_string(a.fusion);
    config.bm25 = a.bm25;
    std::vector<tarkit::RankedList> runs;
    for (const auto& [topic_id, protocol] : protocols) {
        if (!a.topic.empty() && topic_id != a.topic) continue;
        runs.push_back(tarkit::primary_retrieve(protocol, index, index.dictionary(), config));
        std::cerr << topic_id << ": " << runs.back().size() << " candidates\n";
    }
    if (runs.empty()) fail("topic " + a.topic + " not found in " + a.protocol);
    tarkit::write_run_file(runs, a.out, "initial");
    return 0;
}

struct FeaturesArgs {
    std::string index, corpus, protocol, topic, candidates, embeddings, sentence_embeddings, out;
    size_t svd_rank = 64;
    size_t wmd_max_tokens = 200;
    unsigned workers = 0;
};

int run_features_extract(const FeaturesArgs& a) {
    auto index = tarkit::InvertedIndex::load(a.index);
    auto corpus = tarkit::load_corpus_jsonl(a.corpus);
    auto protocol = select_protocol(a.protocol, a.topic);
    auto candidates = select_run(a.candidates, protocol.topic_id);

    auto word_embeddings = tarkit::load_embeddings_text(a.embeddings);
    tarkit::Embeddings sentence_storage;
    const tarkit::Embeddings* sentence = &word_embeddings;
    if (!a.sentence_embeddings.empty() && a.sentence_embeddings != a.embeddings) {
        sentence_storage = tarkit::load_embeddings_text(a.sentence_embeddings);
        sentence = &sentence_storage;
    }

    tarkit::FeatureContext ctx;
    ctx.index = &index;
    ctx.word_embeddings = &word_embeddings;
    ctx.sentence_embeddings = sentence;
    ctx.wmd.max_tokens_per_side = a.wmd_max_tokens;
    ctx.vectorizer = tarkit::TfIdfVectorizer::fit(index);
    {
        std::vector<tarkit::SparseVector> rows;
        rows.reserve(corpus.size());
        for (const auto& doc : corpus.docs())
            rows.push_back(ctx.vectorizer.transform_text(
                tarkit::concat_fields({doc.title, doc.abstract})));
        size_t rank = std::min(a.svd_rank, std::min(rows.size(), ctx.vectorizer.vocabulary_size()));
        if (rank < a.svd_rank)
            std::cerr << "note: svd rank reduced to " << rank << "\n";
        ctx.svd = tarkit::SvdProjector::fit(rows, ctx.vectorizer.vocabulary_size(), rank);
    }

    unsigned workers = a.workers == 0 ? tarkit::default_workers() : a.workers;
    auto matrix = tarkit::extract_topic_features(protocol, candidates.doc_ids(), corpus, ctx,
                                                 workers);
    tarkit::save_feature_matrix(matrix, a.out);
    std::cerr << protocol.topic_id << ": " << matrix.rows() << " rows x "
              << tarkit::kFeatureCount << " features -> " << a.out;
    if (uint64_t undefined = ctx.wmd_undefined.load())
        std::cerr << " (" << undefined << " undefined transport distances zeroed)";
    std::cerr << "\n";
    return 0;
}

struct LtrTrainArgs {
    std::string features_dir, qrels, out;
    tarkit::LtrParams params;
    bool judged_only = false;
};

int run_ltr_train(const LtrTrainArgs& a) {
    auto qrels = tarkit::load_qrels(a.qrels);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(a.features_dir))
        if (entry.path().extension() == ".fmx") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) fail("no .fmx feature files in " + a.features_dir);

    std::vector<tarkit::LtrGroup> groups;
    for (const auto& file : files) {
        auto matrix = tarkit::load_feature_matrix(file.string());
        auto group = tarkit::make_group(matrix, qrels);
        if (a.judged_only) {
            std::vector<tarkit::LtrRow> kept;
            for (auto& row : group.rows)
                if (qrels.has_topic(group.topic_id) &&
                    qrels.labels(group.topic_id).count(row.doc_id))
                    kept.push_back(std::move(row));
            group.rows = std::move(kept);
        }
        groups.push_back(std::move(group));
    }
    groups = tarkit::prepare_groups(std::move(groups),
                                    [](const std::string& msg) { std::cerr << msg << "\n"; });
    auto model = tarkit::train_ltr(groups, a.params);
    model.save(a.out);
    std::cerr << "trained " << model.tree_count() << " trees on " << groups.size()
              << " groups -> " << a.out << "\n";
    return 0;
}

struct LtrRankArgs {
    std::string model, features, out;
};

int run_ltr_rank(const LtrRankArgs& a) {
    auto model = tarkit::LtrModel::load(a.model);
    auto matrix = tarkit::load_feature_matrix(a.features);
    auto run = tarkit::rank_with_model(model, matrix);
    tarkit::write_run_file({run}, a.out, "ltr");
    std::cerr << run.topic_id << ": ranked " << run.size() << " documents -> " << a.out << "\n";
    return 0;
}

int run_ltr_importance(const std::string& model_path) {
    auto model = tarkit::LtrModel::load(model_path);
    auto entries = tarkit::feature_importance(model);
    double total = 0;
    for (const auto& e : entries) total += e.gain;
    std::cout << "feature,name,gain,share\n";
    for (const auto& e : entries) {
        double share = total > 0 ? e.gain / total : 0;
        std::cout << e.feature << "," << e.name << "," << e.gain << "," << share << "\n";
    }
    return 0;
}

struct SimulateArgs {
    std::string method = "hybrid";
    std::string corpus, embeddings, protocol, topic, candidates, model, qrels, out, trace;
    std::string params_text;
    std::string representation = "embedding";
    SeedOption seed;
    size_t budget = 0;
    size_t negatives = 100;
    double svm_c = 0.5;
};

int run_simulate(const SimulateArgs& a) {
    std::string candidates_path = a.candidates.empty() ? a.model : a.candidates;
    if (candidates_path.empty()) fail("simulate needs --candidates (or --model) with a run file");
    auto corpus = tarkit::load_corpus_jsonl(a.corpus);
    auto qrels = tarkit::load_qrels(a.qrels);
    auto protocol = select_protocol(a.protocol, a.topic);
    auto candidates = select_run(candidates_path, protocol.topic_id);
    auto doc_vectors = make_doc_vectors(corpus, a.representation, a.embeddings);
    uint64_t seed = a.seed.resolve();

    tarkit::SvmParams svm;
    svm.c = a.svm_c;
    svm.seed = seed;
    tarkit::OracleReviewer reviewer(qrels, protocol.topic_id);

    tarkit::RankedList final_ranking;
    std::vector<tarkit::TraceRow> trace;
    if (a.method == "hybrid") {
        auto params = parse_feedback_params(a.params_text);
        auto scorer = std::make_shared<tarkit::SvmPendingScorer>(doc_vectors, svm);
        tarkit::ScreeningEngine engine(protocol.topic_id, candidates.doc_ids(), scorer, params);
        final_ranking = tarkit::simulate_screening(engine, reviewer, &trace);
    } else if (a.method == "autotar") {
        if (a.representation != "embedding")
            fail("autotar simulation needs the embedding representation");
        auto emb = tarkit::load_embeddings_text(a.embeddings);
        auto seed_vector = tarkit::autotar_seed_vector(protocol, emb);
        tarkit::AutoTarParams params;
        params.budget = a.budget;
        params.random_negatives_per_round = a.negatives;
        params.svm = svm;
        params.seed = seed;
        auto result = tarkit::run_autotar(candidates, doc_vectors, seed_vector, reviewer, params);
        final_ranking = std::move(result.final_ranking);
        trace = std::move(result.trace);
    } else {
        fail("unknown --method: " + a.method + " (expected hybrid|autotar)");
    }

    tarkit::write_run_file({final_ranking}, a.out, a.method);
    if (!a.trace.empty()) tarkit::write_trace_csv(trace, a.trace);
    size_t relevant = 0;
    for (const auto& row : trace) relevant += row.label > 0 ? 1 : 0;
    std::cerr << protocol.topic_id << ": judged " << trace.size() << " documents (" << relevant
              << " relevant) -> " << a.out << "\n";
    return 0;
}

struct EvaluateArgs {
    std::string run, qrels;
    std::vector<size_t> thresholds;
};

int run_evaluate(const EvaluateArgs& a) {
    auto runs = tarkit::load_run_file(a.run);
    auto qrels = tarkit::load_qrels(a.qrels);
    auto thresholds = a.thresholds.empty() ? tarkit::default_thresholds() : a.thresholds;
    auto report = tarkit::evaluate_runs(runs, qrels, thresholds);
    std::cout << tarkit::report_to_json(report).dump(2) << "\n";
    return 0;
}

struct CurveArgs {
    std::string traces, qrels, out;
    size_t depth = 200;
};

int run_curve(const CurveArgs& a) {
    auto qrels = tarkit::load_qrels(a.qrels);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(a.traces))
        if (entry.path().extension() == ".csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) fail("no .csv trace files in " + a.traces);
    std::map<std::string, std::vector<tarkit::TraceRow>> by_topic;
    for (const auto& file : files)
        for (auto& row : tarkit::load_trace_csv(file.string()))
            by_topic[row.topic_id].push_back(std::move(row));
    auto curve = tarkit::recall_curve(by_topic, qrels, a.depth);
    tarkit::write_curve_csv(curve, a.out);
    std::cerr << "recall curve over " << by_topic.size() << " topics -> " << a.out << "\n";
    return 0;
}

struct PipelineArgs {
    std::string config;
    std::string out_dir;
    unsigned workers = 0;
    int64_t seed = -1;
};

int run_pipeline_cmd(const PipelineArgs& a) {
    std::ifstream is(a.config);
    if (!is) fail("cannot open config file: " + a.config);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(a.config + ": invalid JSON: " + std::string(e.what()));
    }
    // Flag values fill gaps only; explicit config keys win.
    if (!a.out_dir.empty() && !j.count("out_dir")) j["out_dir"] = a.out_dir;
    if (a.workers != 0 && !j.count("workers")) j["workers"] = a.workers;
    if (a.seed >= 0 && !j.count("seed")) j["seed"] = static_cast<uint64_t>(a.seed);
    auto config = tarkit::pipeline_config_from_json(j);
    auto result = tarkit::run_pipeline(config, &std::cerr);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

struct SweepArgs {
    std::string config, grid, out;
};

int run_sweep(const SweepArgs& a) {
    auto config = tarkit::load_pipeline_config(a.config);
    auto rows = tarkit::sweep_thresholds(config, parse_grid(a.grid), &std::cerr);
    std::string csv = tarkit::sweep_to_csv(rows);
    if (a.out.empty())
        std::cout << csv;
    else
        tarkit::io::atomic_write_file(a.out, csv);
    return 0;
}

struct ServeArgs {
    std::string artifacts_dir, host = "127.0.0.1", sessions_dir;
    int port = 8080;
};

/// Loads the service context from an artifacts directory. Optional
/// service.json names the pieces; otherwise conventional file names apply.
std::shared_ptr<tarkit::ServiceContext> load_service_context(const ServeArgs& a) {
    auto resolve = [&](const std::string& name) { return a.artifacts_dir + "/" + name; };
    std::string corpus_path = resolve("corpus.jsonl");
    std::string run_path = resolve("candidates.run");
    std::string embeddings_path = resolve("embeddings.txt");
    std::string qrels_path = resolve("qrels.txt");
    std::string representation = "embedding";
    auto ctx = std::make_shared<tarkit::ServiceContext>();

    std::string manifest = resolve("service.json");
    if (fs::exists(manifest)) {
        std::ifstream is(manifest);
        nlohmann::json j;
        try {
            is >> j;
        } catch (const nlohmann::json::exception& e) {
            fail(manifest + ": invalid JSON: " + std::string(e.what()));
        }
        tarkit::detail::check_keys(
            j, {"corpus", "run", "embeddings", "qrels", "representation", "feedback", "svm"},
            "service.json");
        if (j.count("corpus")) corpus_path = resolve(j.at("corpus").get<std::string>());
        if (j.count("run")) run_path = resolve(j.at("run").get<std::string>());
        if (j.count("embeddings")) embeddings_path = resolve(j.at("embeddings").get<std::string>());
        if (j.count("qrels")) qrels_path = resolve(j.at("qrels").get<std::string>());
        if (j.count("representation")) representation = j.at("representation").get<std::string>();
        if (j.count("feedback")) {
            const auto& f = j.at("feedback");
            tarkit::detail::check_keys(f, {"k", "s_init", "t_init", "s_final", "t_final"},
                                       "feedback");
            tarkit::detail::maybe(f, "k", ctx->default_params.k);
            tarkit::detail::maybe(f, "s_init", ctx->default_params.s_init);
            tarkit::detail::maybe(f, "t_init", ctx->default_params.t_init);
            tarkit::detail::maybe(f, "s_final", ctx->default_params.s_final);
            tarkit::detail::maybe(f, "t_final", ctx->default_params.t_final);
        }
        if (j.count("svm")) {
            const auto& s = j.at("svm");
            tarkit::detail::check_keys(s, {"c", "tolerance", "max_epochs", "seed"}, "svm");
            tarkit::detail::maybe(s, "c", ctx->svm.c);
            tarkit::detail::maybe(s, "tolerance", ctx->svm.tolerance);
            tarkit::detail::maybe(s, "max_epochs", ctx->svm.max_epochs);
            tarkit::detail::maybe(s, "seed", ctx->svm.seed);
        }
    }

    ctx->corpus = tarkit::load_corpus_jsonl(corpus_path);
    for (auto& run : tarkit::load_run_file(run_path)) ctx->runs[run.topic_id] = std::move(run);
    ctx->doc_vectors = make_doc_vectors(ctx->corpus, representation, embeddings_path);
    if (fs::exists(qrels_path)) ctx->qrels = tarkit::load_qrels(qrels_path);
    ctx->sessions_dir = a.sessions_dir.empty() ? a.artifacts_dir + "/sessions" : a.sessions_dir;
    return ctx;
}

int run_serve(const ServeArgs& a) {
    auto service = std::make_shared<tarkit::ScreeningService>(load_service_context(a));
    httplib::Server server;
    tarkit::attach_routes(server, service);
    int port = a.port;
    if (port == 0) {
        port = server.bind_to_any_port(a.host);
        if (port < 0) fail("cannot bind to " + a.host);
    } else if (!server.bind_to_port(a.host, port)) {
        fail("cannot bind to " + a.host + ":" + std::to_string(port));
    }
    std::cout << "listening on " << a.host << ":" << port << std::endl;
    if (!server.listen_after_bind()) fail("server stopped unexpectedly");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"technology-assisted review toolkit"};
    app.require_subcommand(1);

    IndexBuildArgs index_args;
    auto* index_cmd = app.add_subcommand("index", "inverted index operations");
    index_cmd->require_subcommand(1);
    auto* index_build = index_cmd->add_subcommand("build", "build an index from a JSONL corpus");
    index_build->add_option("--corpus", index_args.corpus, "corpus JSONL file")->required();
    index_build->add_option("--out", index_args.out, "output index file")->required();
    index_build->add_option("--max-terms", index_args.dict.max_terms, "dictionary size cap");
    index_build->add_option("--max-df", index_args.dict.max_doc_freq_ratio,
                            "drop terms present in more than this fraction of documents");
    index_build->add_option("--min-count", index_args.dict.min_count,
                            "drop terms occurring fewer times in total");

    RetrieveArgs retrieve_args;
    auto* retrieve_cmd = app.add_subcommand("retrieve", "rank candidates for review protocols");
    retrieve_cmd->add_option("--index", retrieve_args.index, "index file")->required();
    retrieve_cmd->add_option("--protocol", retrieve_args.protocol, "protocol JSONL file")
        ->required();
    retrieve_cmd->add_option("--topic", retrieve_args.topic, "only this topic id");
    retrieve_cmd->add_option("--k", retrieve_args.k, "ranking depth");
    retrieve_cmd->add_option("--fusion", retrieve_args.fusion, "score|rank");
    retrieve_cmd->add_option("--bm25-k1", retrieve_args.bm25.k1, "BM25 k1");
    retrieve_cmd->add_option("--bm25-b", retrieve_args.bm25.b, "BM25 b");
    retrieve_cmd->add_option("--out", retrieve_args.out, "output run file")->required();

    FeaturesArgs features_args;
    auto* features_cmd = app.add_subcommand("features", "feature matrix operations");
    features_cmd->require_subcommand(1);
    auto* features_extract =
        features_cmd->add_subcommand("extract", "extract ranking features for candidates");
    features_extract->add_option("--index", features_args.index, "index file")->required();
    features_extract->add_option("--corpus", features_args.corpus, "corpus JSONL file")
        ->required();
    features_extract->add_option("--protocol", features_args.protocol, "protocol JSONL file")
        ->required();
    features_extract->add_option("--topic", features_args.topic, "only this topic id");
    features_extract->add_option("--candidates", features_args.candidates, "candidate run file")
        ->required();
    features_extract->add_option("--embeddings", features_args.embeddings,
                                 "word embeddings (text format)")
        ->required();
    features_extract->add_option("--sentence-embeddings", features_args.sentence_embeddings,
                                 "separate sentence-embedding vectors");
    features_extract->add_option("--svd-rank", features_args.svd_rank, "latent dimensions");
    features_extract->add_option("--wmd-max-tokens", features_args.wmd_max_tokens,
                                 "transport distance token cap per side");
    features_extract->add_option("--workers", features_args.workers, "worker threads");
    features_extract->add_option("--out", features_args.out, "output feature file")->required();

    LtrTrainArgs ltr_train_args;
    LtrRankArgs ltr_rank_args;
    std::string ltr_importance_model;
    auto* ltr_cmd = app.add_subcommand("ltr", "learning-to-rank operations");
    ltr_cmd->require_subcommand(1);
    auto* ltr_train = ltr_cmd->add_subcommand("train", "train the cross-review ranker");
    ltr_train->add_option("--features-dir", ltr_train_args.features_dir,
                          "directory of .fmx feature files")
        ->required();
    ltr_train->add_option("--qrels", ltr_train_args.qrels, "relevance judgments")->required();
    ltr_train->add_option("--trees", ltr_train_args.params.n_trees, "boosting rounds");
    ltr_train->add_option("--learning-rate", ltr_train_args.params.learning_rate, "shrinkage");
    ltr_train->add_option("--max-depth", ltr_train_args.params.max_depth, "tree depth cap");
    ltr_train->add_option("--min-child-rows", ltr_train_args.params.min_child_rows,
                          "minimum rows per leaf");
    ltr_train->add_flag("--judged-only", ltr_train_args.judged_only,
                        "train only on judged documents");
    ltr_train->add_option("--out", ltr_train_args.out, "output model JSON")->required();
    auto* ltr_rank = ltr_cmd->add_subcommand("rank", "rank candidates with a trained model");
    ltr_rank->add_option("--model", ltr_rank_args.model, "model JSON")->required();
    ltr_rank->add_option("--features", ltr_rank_args.features, "feature file")->required();
    ltr_rank->add_option("--out", ltr_rank_args.out, "output run file")->required();
    auto* ltr_importance =
        ltr_cmd->add_subcommand("importance", "print per-feature split gains as CSV");
    ltr_importance->add_option("--model", ltr_importance_model, "model JSON")->required();

    SimulateArgs simulate_args;
    auto* simulate_cmd =
        app.add_subcommand("simulate", "replay screening with an oracle reviewer");
    simulate_cmd->add_option("--method", simulate_args.method, "hybrid|autotar");
    simulate_cmd->add_option("--corpus", simulate_args.corpus, "corpus JSONL file")->required();
    simulate_cmd->add_option("--embeddings", simulate_args.embeddings,
                             "word embeddings (text format)");
    simulate_cmd->add_option("--protocol", simulate_args.protocol, "protocol JSONL file")
        ->required();
    simulate_cmd->add_option("--topic", simulate_args.topic, "only this topic id");
    simulate_cmd->add_option("--candidates", simulate_args.candidates, "candidate run file");
    simulate_cmd->add_option("--model", simulate_args.model,
                             "alias for --candidates (the ranking to screen)");
    simulate_cmd->add_option("--qrels", simulate_args.qrels, "oracle judgments")->required();
    simulate_cmd->add_option("--params", simulate_args.params_text,
                             "k=10,s_init=1,t_init=200,s_final=50,t_final=1000");
    simulate_cmd->add_option("--representation", simulate_args.representation,
                             "embedding|tfidf classifier vectors");
    simulate_cmd->add_option("--budget", simulate_args.budget,
                             "judgment budget (autotar; 0 = all)");
    simulate_cmd->add_option("--negatives", simulate_args.negatives,
                             "sampled presumed-irrelevant per round (autotar)");
    simulate_cmd->add_option("--svm-c", simulate_args.svm_c, "classifier C");
    simulate_args.seed.attach(simulate_cmd);
    simulate_cmd->add_option("--out", simulate_args.out, "output run file")->required();
    simulate_cmd->add_option("--trace", simulate_args.trace, "judgment trace CSV");

    EvaluateArgs evaluate_args;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "score a run file against qrels");
    evaluate_cmd->add_option("--run", evaluate_args.run, "run file")->required();
    evaluate_cmd->add_option("--qrels", evaluate_args.qrels, "relevance judgments")->required();
    evaluate_cmd->add_option("--thresholds", evaluate_args.thresholds, "recall cutoffs")
        ->delimiter(',');

    CurveArgs curve_args;
    auto* curve_cmd = app.add_subcommand("curve", "recall-vs-effort curve from traces");
    curve_cmd->add_option("--traces", curve_args.traces, "directory of trace CSV files")
        ->required();
    curve_cmd->add_option("--qrels", curve_args.qrels, "relevance judgments")->required();
    curve_cmd->add_option("--depth", curve_args.depth, "judgments to plot");
    curve_cmd->add_option("--out", curve_args.out, "output CSV")->required();

    PipelineArgs pipeline_args;
    auto* pipeline_cmd = app.add_subcommand("pipeline", "multi-stage experiment runner");
    pipeline_cmd->require_subcommand(1);
    auto* pipeline_run = pipeline_cmd->add_subcommand("run", "run the full experiment");
    pipeline_run->add_option("--config", pipeline_args.config, "pipeline config JSON")
        ->required();
    pipeline_run->add_option("--out-dir", pipeline_args.out_dir,
                             "output directory (config value wins)");
    pipeline_run->add_option("--workers", pipeline_args.workers,
                             "worker threads (config value wins)");
    pipeline_run->add_option("--seed", pipeline_args.seed, "random seed (config value wins)");

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "screening threshold grid study");
    sweep_cmd->add_option("--config", sweep_args.config, "pipeline config JSON")->required();
    sweep_cmd->add_option("--grid", sweep_args.grid, "t_init:t_final pairs, comma separated")
        ->required();
    sweep_cmd->add_option("--out", sweep_args.out, "output CSV (default stdout)");

    ServeArgs serve_args;
    auto* serve_cmd = app.add_subcommand("serve", "screening HTTP service");
    serve_cmd->add_option("--artifacts-dir", serve_args.artifacts_dir,
                          "directory with corpus/run/embeddings (see README)")
        ->required();
    serve_cmd->add_option("--port", serve_args.port, "listen port (0 = pick a free one)");
    serve_cmd->add_option("--host", serve_args.host, "bind address");
    serve_cmd->add_option("--sessions-dir", serve_args.sessions_dir,
                          "session journal directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (index_build->parsed()) return run_index_build(index_args);
        if (retrieve_cmd->parsed()) return run_retrieve(retrieve_args);
        if (features_extract->parsed()) return run_features_extract(features_args);
        if (ltr_train->parsed()) return run_ltr_train(ltr_train_args);
        if (ltr_rank->parsed()) return run_ltr_rank(ltr_rank_args);
        if (ltr_importance->parsed()) return run_ltr_importance(ltr_importance_model);
        if (simulate_cmd->parsed()) return run_simulate(simulate_args);
        if (evaluate_cmd->parsed()) return run_evaluate(evaluate_args);
        if (curve_cmd->parsed()) return run_curve(curve_args);
        if (pipeline_run->parsed()) return run_pipeline_cmd(pipeline_args);
        if (sweep_cmd->parsed()) return run_sweep(sweep_args);
        if (serve_cmd->parsed()) return run_serve(serve_args);
    } catch (const tarkit::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
