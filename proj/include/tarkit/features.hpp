#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "tarkit/corpus.hpp"
#include "tarkit/embeddings.hpp"
#include "tarkit/error.hpp"
#include "tarkit/index.hpp"
#include "tarkit/io.hpp"
#include "tarkit/math.hpp"
#include "tarkit/parallel.hpp"
#include "tarkit/protocol.hpp"
#include "tarkit/svd.hpp"
#include "tarkit/tfidf.hpp"
#include "tarkit/wmd.hpp"

namespace tarkit {

constexpr size_t kFeatureCount = 72;
using FeatureVector = std::array<double, kFeatureCount>;

inline const std::array<std::string, kFeatureCount>& feature_names() {
    static const std::array<std::string, kFeatureCount> names = [] {
        std::array<std::string, kFeatureCount> n;
        const auto& fields = Protocol::field_keys();
        const char* doc_fields[2] = {"title", "abstract"};
        size_t i = 0;
        for (size_t f = 0; f < Protocol::kFieldCount; ++f)
            for (const char* df : doc_fields) n[i++] = std::string("bm25_") + fields[f] + "_vs_" + df;
        for (size_t f = 0; f < Protocol::kFieldCount; ++f)
            for (const char* df : doc_fields)
                n[i++] = std::string("log1p_bm25_") + fields[f] + "_vs_" + df;
        for (size_t f = 0; f < Protocol::kFieldCount; ++f)
            for (const char* df : doc_fields)
                n[i++] = std::string("tfidf_cosine_") + fields[f] + "_vs_" + df;
        for (const char* pf : {"title", "objectives"})
            for (const char* df : doc_fields)
                n[i++] = std::string("shared_term_count_") + pf + "_vs_" + df;
        for (const char* pf : {"title", "objectives"})
            for (const char* df : doc_fields)
                n[i++] = std::string("log1p_shared_term_count_") + pf + "_vs_" + df;
        n[i++] = "bm25_seed_vs_doc";
        n[i++] = "bm25_seed_zscore";
        n[i++] = "unigram_overlap";
        n[i++] = "bigram_overlap";
        n[i++] = "shared_term_idf_sum";
        n[i++] = "svd_cosine_seed_vs_title";
        n[i++] = "svd_cosine_seed_vs_abstract";
        n[i++] = "wmd_title_vs_doc";
        n[i++] = "wmd_objectives_vs_doc";
        n[i++] = "sentence_cosine_seed_vs_doc";
        return n;
    }();
    return names;
}

/// Everything fitted over the candidate corpus that feature extraction needs.
/// Immutable after setup apart from the undefined-distance counter.
struct FeatureContext {
    const InvertedIndex* index = nullptr;
    const Embeddings* word_embeddings = nullptr;
    const Embeddings* sentence_embeddings = nullptr;
    TfIdfVectorizer vectorizer;
    SvdProjector svd;
    Bm25Params bm25;
    WmdConfig wmd;
    mutable std::atomic<uint64_t> wmd_undefined{0};

    void require_fitted() const {
        if (!index) fail("feature context: index not set");
        if (!word_embeddings) fail("feature context: word embeddings not set");
        if (!sentence_embeddings) fail("feature context: sentence embeddings not set");
        if (!vectorizer.fitted()) fail("feature context: tf-idf vectorizer not fitted");
        if (!svd.fitted()) fail("feature context: svd projector not fitted");
    }
};

namespace detail {

inline double shared_token_count(const std::vector<std::string>& protocol_tokens,
                                 const std::vector<std::string>& doc_tokens) {
    std::unordered_map<std::string_view, uint32_t> doc_counts;
    for (const auto& t : doc_tokens) ++doc_counts[t];
    std::unordered_set<std::string_view> seen;
    double sum = 0;
    for (const auto& t : protocol_tokens) {
        if (!seen.insert(t).second) continue;
        auto it = doc_counts.find(t);
        if (it != doc_counts.end()) sum += it->second;
    }
    return sum;
}

inline double set_overlap_ratio(const std::set<std::string>& p, const std::set<std::string>& d) {
    if (p.empty()) return 0;
    size_t shared = 0;
    for (const auto& t : p)
        if (d.count(t)) ++shared;
    return static_cast<double>(shared) / static_cast<double>(p.size());
}

}  // namespace detail

/// The per-document feature vector. The z-score entry (index 63) is a
/// placeholder 0 here; it is filled by the topic-level pass, which needs the
/// whole candidate set.
inline FeatureVector extract_features(const Protocol& protocol, const Document& doc,
                                      const FeatureContext& ctx) {
    ctx.require_fitted();
    FeatureVector out{};
    const InvertedIndex& index = *ctx.index;
    uint32_t doc_idx = index.doc_index(doc.doc_id);

    auto title_tokens = tokenize(doc.title);
    auto abstract_tokens = tokenize(doc.abstract);
    auto both_tokens = tokenize(concat_fields({doc.title, doc.abstract}));

    auto protocol_fields = protocol.fields();
    std::array<std::vector<std::string>, Protocol::kFieldCount> field_tokens;
    for (size_t f = 0; f < Protocol::kFieldCount; ++f)
        field_tokens[f] = tokenize(*protocol_fields[f]);
    auto seed_tokens = tokenize(protocol.seed_text());

    // BM25 of every protocol section against each document field, raw and
    // log-damped.
    for (size_t f = 0; f < Protocol::kFieldCount; ++f) {
        double vs_title = index.bm25_by_index(field_tokens[f], doc_idx, Field::title, ctx.bm25);
        double vs_abstract =
            index.bm25_by_index(field_tokens[f], doc_idx, Field::abstract, ctx.bm25);
        out[2 * f] = vs_title;
        out[2 * f + 1] = vs_abstract;
        out[18 + 2 * f] = std::log1p(vs_title);
        out[18 + 2 * f + 1] = std::log1p(vs_abstract);
    }

    // tf-idf cosines over the same grid.
    SparseVector doc_title_vec = ctx.vectorizer.transform(title_tokens);
    SparseVector doc_abstract_vec = ctx.vectorizer.transform(abstract_tokens);
    for (size_t f = 0; f < Protocol::kFieldCount; ++f) {
        SparseVector pv = ctx.vectorizer.transform(field_tokens[f]);
        out[36 + 2 * f] = sparse_cosine(pv, doc_title_vec);
        out[36 + 2 * f + 1] = sparse_cosine(pv, doc_abstract_vec);
    }

    // Occurrence counts of shared terms: title/objectives × title/abstract.
    const std::vector<std::string>* count_fields[2] = {&field_tokens[0], &field_tokens[1]};
    const std::vector<std::string>* doc_sides[2] = {&title_tokens, &abstract_tokens};
    for (size_t p = 0; p < 2; ++p)
        for (size_t d = 0; d < 2; ++d) {
            double c = detail::shared_token_count(*count_fields[p], *doc_sides[d]);
            out[54 + 2 * p + d] = c;
            out[58 + 2 * p + d] = std::log1p(c);
        }

    out[62] = index.bm25_by_index(seed_tokens, doc_idx, Field::both, ctx.bm25);
    // out[63] (z-score of out[62] across the topic) is filled later.

    std::set<std::string> seed_set(seed_tokens.begin(), seed_tokens.end());
    std::set<std::string> doc_set(both_tokens.begin(), both_tokens.end());
    out[64] = detail::set_overlap_ratio(seed_set, doc_set);

    auto seed_bigrams = bigrams(seed_tokens);
    auto doc_bigrams = bigrams(both_tokens);
    out[65] = detail::set_overlap_ratio(
        std::set<std::string>(seed_bigrams.begin(), seed_bigrams.end()),
        std::set<std::string>(doc_bigrams.begin(), doc_bigrams.end()));

    double idf_sum = 0;
    for (const auto& t : seed_set)
        if (doc_set.count(t)) idf_sum += index.idf(t);
    out[66] = idf_sum;

    std::vector<double> seed_proj = ctx.svd.project(ctx.vectorizer.transform(seed_tokens));
    out[67] = cosine(seed_proj, ctx.svd.project(doc_title_vec));
    out[68] = cosine(seed_proj, ctx.svd.project(doc_abstract_vec));

    for (size_t p = 0; p < 2; ++p) {
        try {
            out[69 + p] =
                word_movers_distance(field_tokens[p], both_tokens, *ctx.word_embeddings, ctx.wmd);
        } catch (const Error&) {
            out[69 + p] = 0;  // undefined distance for this pair
            ctx.wmd_undefined.fetch_add(1, std::memory_order_relaxed);
        }
    }

    out[71] = cosine(sentence_embedding(seed_tokens, *ctx.sentence_embeddings),
                     sentence_embedding(both_tokens, *ctx.sentence_embeddings));

    for (double v : out)
        if (!std::isfinite(v)) fail("non-finite feature for doc " + doc.doc_id);
    return out;
}

/// Feature rows for one topic's candidate documents, row-major n × 72.
struct FeatureMatrix {
    std::string topic_id;
    std::vector<std::string> doc_ids;
    std::vector<double> values;

    size_t rows() const { return doc_ids.size(); }

    std::span<const double> row(size_t i) const {
        return {values.data() + i * kFeatureCount, kFeatureCount};
    }
    std::span<double> row(size_t i) { return {values.data() + i * kFeatureCount, kFeatureCount}; }

    double at(size_t i, size_t feature) const { return values[i * kFeatureCount + feature]; }
};

/// Replaces the z-score column with the standardized seed BM25 column
/// (population stdev; constant column → all zeros).
inline void fill_zscore_column(FeatureMatrix& m) {
    constexpr size_t kSeedBm25 = 62, kZScore = 63;
    std::vector<double> scores(m.rows());
    for (size_t i = 0; i < m.rows(); ++i) scores[i] = m.at(i, kSeedBm25);
    double mu = mean(scores);
    double sigma = stdev(scores);
    for (size_t i = 0; i < m.rows(); ++i)
        m.row(i)[kZScore] = sigma > 0 ? (scores[i] - mu) / sigma : 0.0;
}

/// Extracts all candidate rows in parallel, then fills the topic-level
/// z-score column.
inline FeatureMatrix extract_topic_features(const Protocol& protocol,
                                            const std::vector<std::string>& candidate_doc_ids,
                                            const Corpus& corpus, const FeatureContext& ctx,
                                            unsigned workers = default_workers()) {
    FeatureMatrix m;
    m.topic_id = protocol.topic_id;
    m.doc_ids = candidate_doc_ids;
    m.values.assign(candidate_doc_ids.size() * kFeatureCount, 0.0);
    parallel_for(candidate_doc_ids.size(), workers, [&](size_t i) {
        FeatureVector v = extract_features(protocol, corpus.by_id(candidate_doc_ids[i]), ctx);
        std::copy(v.begin(), v.end(), m.row(i).begin());
    });
    fill_zscore_column(m);
    return m;
}

inline void save_feature_matrix(const FeatureMatrix& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) fail("cannot write feature file: " + path);
    os.write("TARKFEA\0", 8);
    io::write_u32(os, 1);
    io::write_string(os, m.topic_id);
    io::write_u64(os, m.rows());
    io::write_u32(os, kFeatureCount);
    for (const auto& id : m.doc_ids) io::write_string(os, id);
    // columnar layout so single-feature scans stay contiguous
    for (size_t f = 0; f < kFeatureCount; ++f)
        for (size_t i = 0; i < m.rows(); ++i) io::write_f64(os, m.at(i, f));
    if (!os) fail("short write: " + path);

    nlohmann::json sidecar;
    sidecar["topic_id"] = m.topic_id;
    sidecar["rows"] = m.rows();
    sidecar["features"] = feature_names();
    std::ofstream js(path + ".json", std::ios::trunc);
    if (!js) fail("cannot write feature sidecar: " + path + ".json");
    js << sidecar.dump(2) << "\n";
}

inline FeatureMatrix load_feature_matrix(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail("cannot open feature file: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::string_view(magic, 8) != std::string_view("TARKFEA\0", 8))
        fail("not a feature file: " + path);
    uint32_t version = io::read_u32(is);
    if (version != 1) fail("unsupported feature file version in " + path);
    FeatureMatrix m;
    m.topic_id = io::read_string(is);
    uint64_t n = io::read_u64(is);
    uint32_t cols = io::read_u32(is);
    if (cols != kFeatureCount)
        fail("feature file has " + std::to_string(cols) + " columns, expected " +
             std::to_string(kFeatureCount));
    m.doc_ids.resize(n);
    for (auto& id : m.doc_ids) id = io::read_string(is);
    m.values.assign(n * kFeatureCount, 0.0);
    for (size_t f = 0; f < kFeatureCount; ++f)
        for (size_t i = 0; i < n; ++i) m.values[i * kFeatureCount + f] = io::read_f64(is);
    if (!is) fail("truncated feature file: " + path);
    return m;
}

}  // namespace tarkit
