#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tarkit/autotar.hpp"
#include "tarkit/corpus.hpp"
#include "tarkit/dictionary.hpp"
#include "tarkit/embeddings.hpp"
#include "tarkit/error.hpp"
#include "tarkit/features.hpp"
#include "tarkit/feedback.hpp"
#include "tarkit/index.hpp"
#include "tarkit/io.hpp"
#include "tarkit/ltr.hpp"
#include "tarkit/metrics.hpp"
#include "tarkit/parallel.hpp"
#include "tarkit/protocol.hpp"
#include "tarkit/qrels.hpp"
#include "tarkit/retrieval.hpp"
#include "tarkit/run_file.hpp"
#include "tarkit/trace.hpp"

namespace tarkit {

struct PipelineConfig {
    std::string corpus_path;
    std::string protocols_path;
    std::string qrels_path;
    std::string embeddings_path;
    std::string sentence_embeddings_path;  // empty → reuse embeddings_path
    std::string out_dir = "out";
    std::string cache_dir;  // empty → out_dir + "/cache"

    DictionaryConfig dictionary;
    Bm25Params bm25;
    size_t retrieval_k = 100000;
    FusionMode fusion = FusionMode::score;
    size_t svd_rank = 64;
    WmdConfig wmd;
    LtrParams ltr;
    bool ltr_judged_only = true;
    FeedbackParams feedback;
    SvmParams svm;
    std::string representation = "embedding";  // or "tfidf"
    bool autotar_enabled = false;
    size_t autotar_budget = 0;
    size_t autotar_negatives = 100;
    std::vector<size_t> thresholds = default_thresholds();
    unsigned workers = 0;  // 0 → hardware concurrency
    uint64_t seed = 42;

    std::string sentence_path() const {
        return sentence_embeddings_path.empty() ? embeddings_path : sentence_embeddings_path;
    }
    std::string cache_path() const {
        return cache_dir.empty() ? out_dir + "/cache" : cache_dir;
    }
    unsigned effective_workers() const { return workers == 0 ? default_workers() : workers; }
};

namespace detail {

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
    auto it = j.find(key);
    if (it != j.end()) out = it->get<T>();
}

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) fail("unknown config key in " + where + ": " + it.key());
    }
}

}  // namespace detail

inline PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
    detail::check_keys(j,
                       {"corpus", "protocols", "qrels", "embeddings", "sentence_embeddings",
                        "out_dir", "cache_dir", "dictionary", "bm25", "retrieval", "features",
                        "ltr", "feedback", "svm", "representation", "autotar", "thresholds",
                        "workers", "seed"},
                       "config");
    PipelineConfig c;
    detail::maybe(j, "corpus", c.corpus_path);
    detail::maybe(j, "protocols", c.protocols_path);
    detail::maybe(j, "qrels", c.qrels_path);
    detail::maybe(j, "embeddings", c.embeddings_path);
    detail::maybe(j, "sentence_embeddings", c.sentence_embeddings_path);
    detail::maybe(j, "out_dir", c.out_dir);
    detail::maybe(j, "cache_dir", c.cache_dir);
    if (j.count("dictionary")) {
        const auto& d = j.at("dictionary");
        detail::check_keys(d, {"max_terms", "max_doc_freq_ratio", "min_count"}, "dictionary");
        detail::maybe(d, "max_terms", c.dictionary.max_terms);
        detail::maybe(d, "max_doc_freq_ratio", c.dictionary.max_doc_freq_ratio);
        detail::maybe(d, "min_count", c.dictionary.min_count);
    }
    if (j.count("bm25")) {
        const auto& b = j.at("bm25");
        detail::check_keys(b, {"k1", "b"}, "bm25");
        detail::maybe(b, "k1", c.bm25.k1);
        detail::maybe(b, "b", c.bm25.b);
    }
    if (j.count("retrieval")) {
        const auto& r = j.at("retrieval");
        detail::check_keys(r, {"k", "fusion"}, "retrieval");
        detail::maybe(r, "k", c.retrieval_k);
        std::string fusion = "score";
        detail::maybe(r, "fusion", fusion);
        c.fusion = fusion_mode_from_string(fusion);
    }
    if (j.count("features")) {
        const auto& f = j.at("features");
        detail::check_keys(f, {"svd_rank", "wmd_max_tokens"}, "features");
        detail::maybe(f, "svd_rank", c.svd_rank);
        detail::maybe(f, "wmd_max_tokens", c.wmd.max_tokens_per_side);
    }
    if (j.count("ltr")) {
        const auto& l = j.at("ltr");
        detail::check_keys(
            l, {"trees", "learning_rate", "max_depth", "min_child_rows", "judged_only"}, "ltr");
        detail::maybe(l, "trees", c.ltr.n_trees);
        detail::maybe(l, "learning_rate", c.ltr.learning_rate);
        detail::maybe(l, "max_depth", c.ltr.max_depth);
        detail::maybe(l, "min_child_rows", c.ltr.min_child_rows);
        detail::maybe(l, "judged_only", c.ltr_judged_only);
    }
    if (j.count("feedback")) {
        const auto& f = j.at("feedback");
        detail::check_keys(f, {"k", "s_init", "t_init", "s_final", "t_final"}, "feedback");
        detail::maybe(f, "k", c.feedback.k);
        detail::maybe(f, "s_init", c.feedback.s_init);
        detail::maybe(f, "t_init", c.feedback.t_init);
        detail::maybe(f, "s_final", c.feedback.s_final);
        detail::maybe(f, "t_final", c.feedback.t_final);
    }
    if (j.count("svm")) {
        const auto& s = j.at("svm");
        detail::check_keys(s, {"c", "tolerance", "max_epochs"}, "svm");
        detail::maybe(s, "c", c.svm.c);
        detail::maybe(s, "tolerance", c.svm.tolerance);
        detail::maybe(s, "max_epochs", c.svm.max_epochs);
    }
    detail::maybe(j, "representation", c.representation);
    if (c.representation != "embedding" && c.representation != "tfidf")
        fail("unknown representation: " + c.representation + " (expected embedding|tfidf)");
    if (j.count("autotar")) {
        const auto& a = j.at("autotar");
        detail::check_keys(a, {"enabled", "budget", "negatives"}, "autotar");
        detail::maybe(a, "enabled", c.autotar_enabled);
        detail::maybe(a, "budget", c.autotar_budget);
        detail::maybe(a, "negatives", c.autotar_negatives);
    }
    detail::maybe(j, "thresholds", c.thresholds);
    detail::maybe(j, "workers", c.workers);
    detail::maybe(j, "seed", c.seed);
    return c;
}

inline PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail("cannot open config file: " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(path + ": invalid JSON: " + std::string(e.what()));
    }
    return pipeline_config_from_json(j);
}

/// Which topics each leave-one-out model was trained on; lets tests and
/// reports verify the held-out topic never leaked into training.
struct LeaveOneOutAudit {
    std::map<std::string, std::set<std::string>> trained_on;  // held-out → training topics

    bool leak_free() const {
        for (const auto& [held_out, trained] : trained_on)
            if (trained.count(held_out)) return false;
        return true;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        for (const auto& [held_out, trained] : trained_on) {
            j[held_out]["trained_on"] = trained;
            j[held_out]["held_out_excluded"] = trained.count(held_out) == 0;
        }
        return j;
    }
};

struct StageRuns {
    std::vector<RankedList> initial;
    std::vector<RankedList> inter;
    std::vector<RankedList> intra;
    std::vector<RankedList> autotar;
};

struct PipelineResult {
    StageRuns runs;
    MetricsReport initial_report;
    MetricsReport inter_report;
    MetricsReport intra_report;
    std::optional<MetricsReport> autotar_report;
    LeaveOneOutAudit audit;
    std::map<std::string, std::vector<TraceRow>> intra_traces;
    std::map<std::string, std::vector<TraceRow>> autotar_traces;
    std::vector<std::string> warnings;
    size_t feature_cache_hits = 0;
    size_t feature_cache_misses = 0;
};

/// Shared immutable artifacts the pipeline fits once per corpus. Handled
/// through shared_ptr because the feature context points back into the
/// sibling members (index, embeddings).
struct PipelineArtifacts {
    Corpus corpus;
    std::map<std::string, Protocol> protocols;
    Qrels qrels;
    Embeddings word_embeddings;
    Embeddings sentence_embeddings_storage;  // unused when paths coincide
    const Embeddings* sentence_embeddings = nullptr;
    InvertedIndex index;
    FeatureContext features;
    DocVectors doc_vectors;
    uint64_t content_hash = 0;  // over all input files + fitted parameters

    PipelineArtifacts() = default;
    PipelineArtifacts(const PipelineArtifacts&) = delete;
    PipelineArtifacts& operator=(const PipelineArtifacts&) = delete;
};

namespace detail {

inline uint64_t file_hash(const std::string& path) { return io::fnv1a64(io::read_file(path)); }

inline std::string feature_cache_file(const PipelineConfig& config, const std::string& topic_id,
                                      uint64_t key) {
    return config.cache_path() + "/features-" + topic_id + "-" + io::hex64(key) + ".fmx";
}

}  // namespace detail

inline std::shared_ptr<PipelineArtifacts> prepare_pipeline(
    const PipelineConfig& config, std::vector<std::string>* warnings = nullptr) {
    for (const auto& [what, path] :
         std::initializer_list<std::pair<const char*, const std::string&>>{
             {"corpus", config.corpus_path},
             {"protocols", config.protocols_path},
             {"qrels", config.qrels_path},
             {"embeddings", config.embeddings_path}}) {
        if (path.empty()) fail(std::string("pipeline config missing ") + what + " path");
        if (!std::filesystem::exists(path))
            fail(std::string(what) + " file not found: " + path);
    }

    auto artifacts = std::make_shared<PipelineArtifacts>();
    PipelineArtifacts& a = *artifacts;
    a.corpus = load_corpus_jsonl(config.corpus_path);
    a.protocols = load_protocols_jsonl(config.protocols_path);
    a.qrels = load_qrels(config.qrels_path);
    a.word_embeddings = load_embeddings_text(config.embeddings_path);
    if (config.sentence_path() == config.embeddings_path) {
        a.sentence_embeddings = &a.word_embeddings;
    } else {
        if (!std::filesystem::exists(config.sentence_path()))
            fail("sentence embeddings file not found: " + config.sentence_path());
        a.sentence_embeddings_storage = load_embeddings_text(config.sentence_path());
        a.sentence_embeddings = &a.sentence_embeddings_storage;
    }

    Dictionary dict = build_dictionary(a.corpus, config.dictionary);
    a.index = build_index(a.corpus, dict);

    a.features.index = &a.index;
    a.features.word_embeddings = &a.word_embeddings;
    a.features.sentence_embeddings = a.sentence_embeddings;
    a.features.bm25 = config.bm25;
    a.features.wmd = config.wmd;
    a.features.vectorizer = TfIdfVectorizer::fit(a.index);
    {
        std::vector<SparseVector> rows;
        rows.reserve(a.corpus.size());
        for (const auto& doc : a.corpus.docs())
            rows.push_back(
                a.features.vectorizer.transform_text(concat_fields({doc.title, doc.abstract})));
        size_t max_rank = std::min(rows.size(), a.features.vectorizer.vocabulary_size());
        size_t rank = std::min(config.svd_rank, max_rank);
        if (rank < config.svd_rank && warnings)
            warnings->push_back("svd rank reduced to " + std::to_string(rank) +
                                " (matrix is only " + std::to_string(rows.size()) + "x" +
                                std::to_string(a.features.vectorizer.vocabulary_size()) + ")");
        a.features.svd =
            SvdProjector::fit(rows, a.features.vectorizer.vocabulary_size(), rank);
    }

    if (config.representation == "tfidf")
        a.doc_vectors = build_tfidf_vectors(a.corpus, a.features.vectorizer);
    else
        a.doc_vectors = build_sentence_vectors(a.corpus, *a.sentence_embeddings);

    std::ostringstream fingerprint;
    fingerprint << detail::file_hash(config.corpus_path) << "|"
                << detail::file_hash(config.protocols_path) << "|"
                << detail::file_hash(config.embeddings_path) << "|"
                << detail::file_hash(config.sentence_path()) << "|" << config.dictionary.max_terms
                << "|" << config.dictionary.max_doc_freq_ratio << "|"
                << config.dictionary.min_count << "|" << config.bm25.k1 << "|" << config.bm25.b
                << "|" << config.svd_rank << "|" << config.wmd.max_tokens_per_side << "|"
                << config.retrieval_k << "|" << static_cast<int>(config.fusion);
    a.content_hash = io::fnv1a64(fingerprint.str());
    return artifacts;
}

/// Feature matrix for one topic's candidates, cached on disk keyed by the
/// content hash of everything that could change the values.
inline FeatureMatrix topic_features_cached(const PipelineConfig& config,
                                           const PipelineArtifacts& artifacts,
                                           const Protocol& protocol,
                                           const std::vector<std::string>& candidates,
                                           bool* cache_hit = nullptr) {
    std::ostringstream key_src;
    key_src << io::hex64(artifacts.content_hash) << "|" << protocol_to_json(protocol).dump();
    for (const auto& id : candidates) key_src << "|" << id;
    uint64_t key = io::fnv1a64(key_src.str());
    std::string path = detail::feature_cache_file(config, protocol.topic_id, key);
    if (std::filesystem::exists(path)) {
        if (cache_hit) *cache_hit = true;
        return load_feature_matrix(path);
    }
    if (cache_hit) *cache_hit = false;
    FeatureMatrix m = extract_topic_features(protocol, candidates, artifacts.corpus,
                                             artifacts.features, config.effective_workers());
    std::filesystem::create_directories(config.cache_path());
    save_feature_matrix(m, path);
    return m;
}

/// End-to-end run: candidate retrieval, leave-one-out cross-review ranking,
/// then simulated relevance-feedback screening, with per-stage evaluation.
inline PipelineResult run_pipeline(const PipelineConfig& config, std::ostream* log = nullptr) {
    PipelineResult result;
    auto say = [&](const std::string& msg) {
        if (log) *log << msg << "\n";
    };

    auto artifacts_ptr = prepare_pipeline(config, &result.warnings);
    PipelineArtifacts& artifacts = *artifacts_ptr;
    if (artifacts.protocols.size() < 2)
        fail("leave-one-out requires at least 2 topics, got " +
             std::to_string(artifacts.protocols.size()));

    std::vector<std::string> topics;
    for (const auto& [topic_id, p] : artifacts.protocols) topics.push_back(topic_id);
    const size_t n_topics = topics.size();
    say("pipeline: " + std::to_string(n_topics) + " topics, " +
        std::to_string(artifacts.corpus.size()) + " documents");

    std::filesystem::create_directories(config.out_dir + "/runs");
    std::filesystem::create_directories(config.out_dir + "/traces");

    // Stage 1 + features, topic-parallel.
    std::vector<RankedList> initial(n_topics);
    std::vector<FeatureMatrix> features(n_topics);
    std::mutex mu;
    parallel_for(n_topics, config.effective_workers(), [&](size_t i) {
        const Protocol& protocol = artifacts.protocols.at(topics[i]);
        RetrievalConfig rc;
        rc.k = config.retrieval_k;
        rc.fusion = config.fusion;
        rc.bm25 = config.bm25;
        RankedList run =
            primary_retrieve(protocol, artifacts.index, artifacts.index.dictionary(), rc);
        bool hit = false;
        FeatureMatrix fm =
            topic_features_cached(config, artifacts, protocol, run.doc_ids(), &hit);
        fill_zscore_column(fm);
        std::lock_guard<std::mutex> lock(mu);
        initial[i] = std::move(run);
        features[i] = std::move(fm);
        (hit ? result.feature_cache_hits : result.feature_cache_misses) += 1;
    });

    // Per-topic training groups (only judged documents by default).
    std::vector<LtrGroup> all_groups(n_topics);
    for (size_t i = 0; i < n_topics; ++i) {
        const FeatureMatrix& fm = features[i];
        LtrGroup g;
        g.topic_id = fm.topic_id;
        bool topic_judged = artifacts.qrels.has_topic(fm.topic_id);
        for (size_t r = 0; r < fm.rows(); ++r) {
            const std::string& doc_id = fm.doc_ids[r];
            if (config.ltr_judged_only &&
                (!topic_judged || !artifacts.qrels.labels(fm.topic_id).count(doc_id)))
                continue;
            LtrRow row;
            auto span = fm.row(r);
            std::copy(span.begin(), span.end(), row.features.begin());
            row.doc_id = doc_id;
            row.label = topic_judged && artifacts.qrels.label(fm.topic_id, doc_id) > 0 ? 1 : 0;
            g.rows.push_back(std::move(row));
        }
        all_groups[i] = std::move(g);
    }

    // Stage 2: leave-one-out cross-review ranking.
    std::vector<RankedList> inter(n_topics);
    parallel_for(n_topics, config.effective_workers(), [&](size_t i) {
        std::vector<LtrGroup> training;
        std::set<std::string> trained_on;
        for (size_t o = 0; o < n_topics; ++o) {
            if (o == i) continue;
            if (!all_groups[o].has_both_labels()) {
                std::lock_guard<std::mutex> lock(mu);
                result.warnings.push_back("dropping training group " + all_groups[o].topic_id +
                                          ": needs both labels");
                continue;
            }
            training.push_back(all_groups[o]);
            trained_on.insert(all_groups[o].topic_id);
        }
        if (training.empty())
            fail("no usable training topics when holding out " + topics[i]);
        LtrModel model = train_ltr(training, config.ltr);
        RankedList ranked = rank_with_model(model, features[i]);
        std::lock_guard<std::mutex> lock(mu);
        inter[i] = std::move(ranked);
        result.audit.trained_on[topics[i]] = std::move(trained_on);
    });

    // Stage 3: simulated relevance-feedback screening over the stage-2 order.
    std::vector<RankedList> intra(n_topics);
    std::vector<RankedList> autotar_runs(n_topics);
    parallel_for(n_topics, config.effective_workers(), [&](size_t i) {
        const std::string& topic = topics[i];
        auto scorer = std::make_shared<SvmPendingScorer>(artifacts.doc_vectors, [&] {
            SvmParams p = config.svm;
            p.seed = config.seed;
            return p;
        }());
        ScreeningEngine engine(topic, inter[i].doc_ids(), scorer, config.feedback);
        OracleReviewer reviewer(artifacts.qrels, topic);
        std::vector<TraceRow> trace;
        RankedList final_run = simulate_screening(engine, reviewer, &trace);

        std::optional<AutoTarResult> at;
        if (config.autotar_enabled) {
            AutoTarParams ap;
            ap.budget = std::min(config.autotar_budget == 0 ? inter[i].size()
                                                            : config.autotar_budget,
                                 inter[i].size());
            ap.random_negatives_per_round = config.autotar_negatives;
            ap.svm = config.svm;
            ap.seed = config.seed;
            OracleReviewer at_reviewer(artifacts.qrels, topic);
            auto seed_vec = config.representation == "tfidf"
                                ? [&] {
                                      std::vector<double> dense(
                                          artifacts.features.vectorizer.vocabulary_size(), 0.0);
                                      for (auto [col, v] :
                                           artifacts.features.vectorizer.transform_text(
                                               artifacts.protocols.at(topic).seed_text()))
                                          dense[col] = v;
                                      return dense;
                                  }()
                                : autotar_seed_vector(artifacts.protocols.at(topic),
                                                      *artifacts.sentence_embeddings);
            at = run_autotar(inter[i], artifacts.doc_vectors, seed_vec, at_reviewer, ap);
        }

        std::lock_guard<std::mutex> lock(mu);
        intra[i] = std::move(final_run);
        result.intra_traces[topic] = std::move(trace);
        if (at) {
            autotar_runs[i] = std::move(at->final_ranking);
            result.autotar_traces[topic] = std::move(at->trace);
        }
    });

    if (!result.audit.leak_free()) fail("leave-one-out audit failed: held-out topic leaked");

    for (size_t i = 0; i < n_topics; ++i) {
        write_run_file({initial[i]}, config.out_dir + "/runs/" + topics[i] + ".initial.run",
                       "initial");
        write_run_file({inter[i]}, config.out_dir + "/runs/" + topics[i] + ".inter.run", "inter");
        write_run_file({intra[i]}, config.out_dir + "/runs/" + topics[i] + ".intra.run", "intra");
        write_trace_csv(result.intra_traces[topics[i]],
                        config.out_dir + "/traces/" + topics[i] + ".intra.csv");
        if (config.autotar_enabled) {
            write_run_file({autotar_runs[i]},
                           config.out_dir + "/runs/" + topics[i] + ".autotar.run", "autotar");
            write_trace_csv(result.autotar_traces[topics[i]],
                            config.out_dir + "/traces/" + topics[i] + ".autotar.csv");
        }
    }

    result.initial_report = evaluate_runs(initial, artifacts.qrels, config.thresholds);
    result.inter_report = evaluate_runs(inter, artifacts.qrels, config.thresholds);
    result.intra_report = evaluate_runs(intra, artifacts.qrels, config.thresholds);
    if (config.autotar_enabled)
        result.autotar_report = evaluate_runs(autotar_runs, artifacts.qrels, config.thresholds);

    nlohmann::json summary;
    summary["initial"] = report_to_json(result.initial_report);
    summary["inter"] = report_to_json(result.inter_report);
    summary["intra"] = report_to_json(result.intra_report);
    if (result.autotar_report) summary["autotar"] = report_to_json(*result.autotar_report);
    summary["warnings"] = result.warnings;
    summary["audit"] = result.audit.to_json();
    io::atomic_write_file(config.out_dir + "/report.json", summary.dump(2) + "\n");

    std::vector<std::pair<std::string, MetricsReport>> named = {
        {"initial", result.initial_report},
        {"inter", result.inter_report},
        {"intra", result.intra_report}};
    if (result.autotar_report) named.emplace_back("autotar", *result.autotar_report);
    io::atomic_write_file(config.out_dir + "/comparison.csv",
                          comparison_to_csv(compare_reports(named)));

    result.runs.initial = std::move(initial);
    result.runs.inter = std::move(inter);
    result.runs.intra = std::move(intra);
    if (config.autotar_enabled) result.runs.autotar = std::move(autotar_runs);
    say("pipeline: done; reports in " + config.out_dir);
    return result;
}

struct SweepRow {
    size_t t_init = 0;
    size_t t_final = 0;
    MetricsReport report;
};

/// Re-runs the screening stage over an existing stage-2 ranking for each
/// (t_init, t_final) pair; stage-1/2 artifacts are shared across the grid.
inline std::vector<SweepRow> sweep_thresholds(const PipelineConfig& base,
                                              const std::vector<std::pair<size_t, size_t>>& grid,
                                              std::ostream* log = nullptr) {
    if (grid.empty()) fail("sweep needs a non-empty grid");
    PipelineConfig config = base;
    config.autotar_enabled = false;
    PipelineResult first = run_pipeline(config, log);
    auto artifacts_ptr = prepare_pipeline(config);
    PipelineArtifacts& artifacts = *artifacts_ptr;

    std::vector<SweepRow> rows;
    for (auto [t_init, t_final] : grid) {
        PipelineConfig c = config;
        c.feedback.t_init = t_init;
        c.feedback.t_final = t_final;
        c.feedback.validate();

        std::vector<RankedList> intra(first.runs.inter.size());
        std::mutex mu;
        parallel_for(first.runs.inter.size(), c.effective_workers(), [&](size_t i) {
            const RankedList& inter = first.runs.inter[i];
            auto scorer = std::make_shared<SvmPendingScorer>(artifacts.doc_vectors, [&] {
                SvmParams p = c.svm;
                p.seed = c.seed;
                return p;
            }());
            ScreeningEngine engine(inter.topic_id, inter.doc_ids(), scorer, c.feedback);
            OracleReviewer reviewer(artifacts.qrels, inter.topic_id);
            RankedList run = simulate_screening(engine, reviewer, nullptr);
            std::lock_guard<std::mutex> lock(mu);
            intra[i] = std::move(run);
        });
        SweepRow row;
        row.t_init = t_init;
        row.t_final = t_final;
        row.report = evaluate_runs(intra, artifacts.qrels, c.thresholds);
        rows.push_back(std::move(row));
        if (log)
            *log << "sweep t_init=" << t_init << " t_final=" << t_final
                 << " last_rel=" << rows.back().report.macro_last_rel << "\n";
    }
    return rows;
}

inline std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os.precision(6);
    os << "t_init,t_final";
    if (!rows.empty())
        for (size_t t : rows.front().report.thresholds) os << ",recall@" << t;
    os << ",map,wss@100,last_rel\n";
    for (const auto& row : rows) {
        os << row.t_init << "," << row.t_final;
        for (size_t t : row.report.thresholds) os << "," << std::fixed << row.report.macro_recall.at(t);
        os << "," << row.report.macro_ap << "," << row.report.macro_wss << ","
           << row.report.macro_last_rel << "\n";
    }
    return os.str();
}

}  // namespace tarkit
