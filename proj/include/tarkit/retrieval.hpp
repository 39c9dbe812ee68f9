#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "tarkit/error.hpp"
#include "tarkit/index.hpp"
#include "tarkit/protocol.hpp"
#include "tarkit/run_file.hpp"

namespace tarkit {

enum class FusionMode { score, rank };

inline FusionMode fusion_mode_from_string(const std::string& s) {
    if (s == "score") return FusionMode::score;
    if (s == "rank") return FusionMode::rank;
    fail("unknown fusion mode: " + s + " (expected score|rank)");
}

struct RetrievalConfig {
    size_t k = 100000;
    FusionMode fusion = FusionMode::score;
    Bm25Params bm25;
    Field field = Field::both;
};

/// Tokenizes protocol text and keeps only dictionary terms, preserving order
/// and duplicates.
inline std::vector<std::string> formulate_query(const std::string& field_text,
                                                const Dictionary& dictionary) {
    std::vector<std::string> out;
    for (auto& token : tokenize(field_text))
        if (dictionary.contains(token)) out.push_back(std::move(token));
    return out;
}

namespace detail {

inline void sort_ranking(std::vector<ScoredDoc>& entries) {
    std::sort(entries.begin(), entries.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
}

}  // namespace detail

/// BM25 ranking of the query against every document, truncated to the top K.
/// Ties are broken by ascending doc_id; an empty or out-of-vocabulary query
/// yields an empty ranking.
inline RankedList retrieve_topk(const std::vector<std::string>& query_tokens,
                                const InvertedIndex& index, size_t k,
                                const RetrievalConfig& config = {}) {
    if (k < 1) fail("retrieval depth must be at least 1");
    RankedList out;
    if (query_tokens.empty()) return out;
    auto scored = index.score_all(query_tokens, config.field, config.bm25);
    out.entries.reserve(scored.size());
    for (auto [doc, score] : scored) out.entries.push_back({index.doc_ids()[doc], score});
    detail::sort_ranking(out.entries);
    out.truncate(k);
    return out;
}

/// Min-max normalizes each list's scores to [0,1] (constant or single-entry
/// lists map to 1.0), or replaces scores by 1 − (rank−1)/(len−1) in rank mode,
/// then sums. A document absent from one list contributes 0 from it.
inline RankedList fuse(const RankedList& list_a, const RankedList& list_b, size_t k,
                       FusionMode mode = FusionMode::score) {
    if (list_a.empty() && list_b.empty())
        fail("retrieval returned no documents for topic " +
             (list_a.topic_id.empty() ? list_b.topic_id : list_a.topic_id));

    std::unordered_map<std::string, double> fused;
    auto accumulate = [&](const RankedList& list) {
        if (list.empty()) return;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& e : list.entries) {
            lo = std::min(lo, e.score);
            hi = std::max(hi, e.score);
        }
        double len = static_cast<double>(list.size());
        for (size_t i = 0; i < list.entries.size(); ++i) {
            const auto& e = list.entries[i];
            double normalized;
            if (mode == FusionMode::rank)
                normalized =
                    list.size() == 1 ? 1.0 : 1.0 - static_cast<double>(i) / (len - 1.0);
            else
                normalized = hi > lo ? (e.score - lo) / (hi - lo) : 1.0;
            fused[e.doc_id] += normalized;
        }
    };
    accumulate(list_a);
    accumulate(list_b);

    RankedList out;
    out.topic_id = list_a.topic_id.empty() ? list_b.topic_id : list_a.topic_id;
    out.entries.reserve(fused.size());
    for (const auto& [doc_id, score] : fused) out.entries.push_back({doc_id, score});
    detail::sort_ranking(out.entries);
    out.truncate(k);
    return out;
}

/// Stage-1 candidate retrieval: the protocol title and objectives are issued
/// as separate queries and their rankings fused.
inline RankedList primary_retrieve(const Protocol& protocol, const InvertedIndex& index,
                                   const Dictionary& dictionary,
                                   const RetrievalConfig& config = {}) {
    auto title_query = formulate_query(protocol.title, dictionary);
    auto objectives_query = formulate_query(protocol.objectives, dictionary);
    RankedList by_title = retrieve_topk(title_query, index, config.k, config);
    RankedList by_objectives = retrieve_topk(objectives_query, index, config.k, config);
    by_title.topic_id = protocol.topic_id;
    by_objectives.topic_id = protocol.topic_id;
    RankedList out = fuse(by_title, by_objectives, config.k, config.fusion);
    out.topic_id = protocol.topic_id;
    return out;
}

}  // namespace tarkit
