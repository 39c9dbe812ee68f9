#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "tarkit/embeddings.hpp"
#include "tarkit/error.hpp"
#include "tarkit/feedback.hpp"
#include "tarkit/linear_svm.hpp"
#include "tarkit/protocol.hpp"
#include "tarkit/run_file.hpp"
#include "tarkit/trace.hpp"

namespace tarkit {

struct AutoTarParams {
    size_t budget = 0;  // 0 = judge the whole candidate list
    size_t random_negatives_per_round = 100;
    SvmParams svm;
    uint64_t seed = 42;
};

struct AutoTarResult {
    RankedList final_ranking;
    std::vector<TraceRow> trace;
};

/// Continuous-active-learning baseline: rounds of training on all judgments
/// plus a synthetic relevant seed document and freshly sampled
/// presumed-irrelevant documents, then judging the top B, with B growing by
/// ceil(B/10) each round. The seed document never appears in the output.
inline AutoTarResult run_autotar(const RankedList& candidates, const DocVectors& doc_vectors,
                                 std::span<const double> seed_vector, Reviewer& reviewer,
                                 const AutoTarParams& params = {}) {
    if (candidates.empty()) fail("incremental baseline needs a non-empty candidate list");
    const size_t n = candidates.size();
    size_t budget = params.budget == 0 ? n : params.budget;
    if (budget > n)
        fail("budget " + std::to_string(budget) + " exceeds candidate count " +
             std::to_string(n));
    if (seed_vector.size() != doc_vectors.dim())
        fail("seed vector dimension mismatch");

    // Unjudged pool, kept in current-ranking order.
    std::vector<std::string> pool = candidates.doc_ids();
    {
        std::unordered_set<std::string> seen;
        for (const auto& id : pool)
            if (!seen.insert(id).second) fail("duplicate candidate doc_id: " + id);
    }

    std::mt19937_64 rng(params.seed);
    std::vector<Judgment> judged;
    judged.reserve(budget);
    size_t batch = 1;
    size_t round = 0;

    AutoTarResult result;
    result.final_ranking.topic_id = candidates.topic_id;

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    const std::vector<double> seed_row(seed_vector.begin(), seed_vector.end());

    while (judged.size() < budget) {
        ++round;

        // Training set: all real judgments, the synthetic seed (relevant),
        // and freshly sampled unjudged documents presumed irrelevant.
        rows.clear();
        labels.clear();
        for (const auto& j : judged) {
            rows.push_back(doc_vectors.copy_of(j.doc_id));
            labels.push_back(j.label > 0 ? 1 : -1);
        }
        rows.push_back(seed_row);
        labels.push_back(1);
        {
            std::vector<size_t> sample_idx(pool.size());
            std::iota(sample_idx.begin(), sample_idx.end(), 0);
            std::shuffle(sample_idx.begin(), sample_idx.end(), rng);
            size_t take = std::min(params.random_negatives_per_round, pool.size());
            for (size_t i = 0; i < take; ++i) {
                rows.push_back(doc_vectors.copy_of(pool[sample_idx[i]]));
                labels.push_back(-1);
            }
        }

        SvmParams svm = params.svm;
        svm.seed = params.seed + round;  // deterministic, round-specific shuffles
        LinearClassifier clf = train_linear_svm(rows, labels, svm);

        std::vector<std::pair<double, std::string>> ranked;
        ranked.reserve(pool.size());
        for (auto& id : pool) ranked.emplace_back(clf.decision(doc_vectors.vector(id)), std::move(id));
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (size_t i = 0; i < ranked.size(); ++i) pool[i] = std::move(ranked[i].second);

        size_t take = std::min({batch, budget - judged.size(), pool.size()});
        for (size_t i = 0; i < take; ++i) {
            const std::string doc = pool.front();
            pool.erase(pool.begin());
            int label = reviewer.judge(doc);
            judged.push_back({doc, label > 0 ? 1 : 0});
            result.trace.push_back({candidates.topic_id, round, doc, label > 0 ? 1 : 0,
                                    judged.size(), batch});
        }
        batch += (batch + 9) / 10;  // B <- B + ceil(B/10)
    }

    double score = static_cast<double>(n);
    for (const auto& j : judged) result.final_ranking.entries.push_back({j.doc_id, score--});
    for (const auto& id : pool) result.final_ranking.entries.push_back({id, score--});
    return result;
}

/// The synthetic seed pseudo-document vector: the sentence embedding of the
/// protocol's title+objectives.
inline std::vector<double> autotar_seed_vector(const Protocol& protocol, const Embeddings& emb) {
    return sentence_embedding(tokenize(protocol.seed_text()), emb);
}

}  // namespace tarkit
