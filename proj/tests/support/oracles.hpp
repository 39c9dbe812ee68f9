#pragma once

// Independent reference implementations used to cross-check the library.
// Everything here is written for clarity over speed and shares no code with
// the implementations under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace test_support {

// ------------------------------------------------------------ rank metrics

/// Fraction of relevant docs found in the first `depth` entries.
inline double brute_recall_at(const std::vector<std::string>& ranking,
                              const std::set<std::string>& relevant, size_t depth) {
    size_t found = 0;
    for (size_t i = 0; i < ranking.size() && i < depth; ++i)
        if (relevant.count(ranking[i])) ++found;
    return static_cast<double>(found) / static_cast<double>(relevant.size());
}

/// Mean over all relevant docs of precision at each relevant hit; relevant
/// docs absent from the ranking contribute zero.
inline double brute_average_precision(const std::vector<std::string>& ranking,
                                      const std::set<std::string>& relevant) {
    double sum = 0;
    size_t hits = 0;
    for (size_t i = 0; i < ranking.size(); ++i) {
        if (!relevant.count(ranking[i])) continue;
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
    return sum / static_cast<double>(relevant.size());
}

/// 1-based rank of the last relevant document (scan from the bottom).
inline size_t brute_last_rel(const std::vector<std::string>& ranking,
                             const std::set<std::string>& relevant) {
    for (size_t i = ranking.size(); i > 0; --i)
        if (relevant.count(ranking[i - 1])) return i;
    return 0;
}

inline double brute_wss100(const std::vector<std::string>& ranking,
                           const std::set<std::string>& relevant, size_t collection_size) {
    return static_cast<double>(collection_size - brute_last_rel(ranking, relevant)) /
           static_cast<double>(collection_size);
}

/// NDCG at `depth` computed straight from the definition (gain 2^label - 1,
/// log2 discounts). `labels_in_rank_order` lists labels of the ranking.
inline double brute_ndcg(const std::vector<int>& labels_in_rank_order, size_t depth) {
    auto dcg = [&](const std::vector<int>& labels) {
        double sum = 0;
        for (size_t i = 0; i < labels.size() && i < depth; ++i)
            sum += (std::pow(2.0, labels[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
        return sum;
    };
    std::vector<int> ideal = labels_in_rank_order;
    std::sort(ideal.begin(), ideal.end(), std::greater<int>());
    double idcg = dcg(ideal);
    return idcg == 0 ? 0 : dcg(labels_in_rank_order) / idcg;
}

// -------------------------------------------------- optimal transport oracle

/// Exact minimum-cost transport by exhaustive search over leaf-saturation
/// orders (every basic solution of the transportation polytope is reachable
/// by repeatedly saturating one edge and retiring the exhausted side), with
/// an admissible bound (remaining mass x cheapest remaining edge) for
/// pruning. Exponential, so only for tiny instances (<= ~6 per side).
class TransportOracle {
  public:
    TransportOracle(std::vector<double> supplies, std::vector<double> demands,
                    std::vector<std::vector<double>> cost)
        : supplies_(std::move(supplies)), demands_(std::move(demands)), cost_(std::move(cost)) {}

    double solve() {
        best_ = std::numeric_limits<double>::infinity();
        search(supplies_, demands_, 0.0);
        return best_;
    }

  private:
    void search(std::vector<double> s, std::vector<double> d, double acc) {
        constexpr double kEps = 1e-12;
        double remaining = 0;
        for (double v : s) remaining += v;
        if (remaining <= kEps) {
            best_ = std::min(best_, acc);
            return;
        }
        double cheapest = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < s.size(); ++i) {
            if (s[i] <= kEps) continue;
            for (size_t j = 0; j < d.size(); ++j) {
                if (d[j] <= kEps) continue;
                cheapest = std::min(cheapest, cost_[i][j]);
            }
        }
        if (acc + remaining * cheapest >= best_) return;  // admissible bound

        for (size_t i = 0; i < s.size(); ++i) {
            if (s[i] <= kEps) continue;
            for (size_t j = 0; j < d.size(); ++j) {
                if (d[j] <= kEps) continue;
                double flow = std::min(s[i], d[j]);
                auto s2 = s;
                auto d2 = d;
                s2[i] -= flow;
                d2[j] -= flow;
                search(std::move(s2), std::move(d2), acc + flow * cost_[i][j]);
            }
        }
    }

    std::vector<double> supplies_, demands_;
    std::vector<std::vector<double>> cost_;
    double best_ = 0;
};

// ----------------------------------------------- pairwise ranking objective

/// The RankNet-weighted pairwise objective whose gradient the lambda
/// computation implements: sum over (relevant i, irrelevant j) of
/// delta_ij * log(1 + exp(-(s_i - s_j))), with delta_ij the swap-NDCG
/// weight held fixed at the base ranking.
class PairwiseObjective {
  public:
    PairwiseObjective(const std::vector<double>& base_scores, const std::vector<int>& labels)
        : labels_(labels) {
        size_t n = labels.size();
        // Ranks at the base scores (descending, index ascending on ties).
        std::vector<size_t> order(n);
        for (size_t i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            if (base_scores[a] != base_scores[b]) return base_scores[a] > base_scores[b];
            return a < b;
        });
        std::vector<size_t> rank(n);
        for (size_t pos = 0; pos < n; ++pos) rank[order[pos]] = pos + 1;

        std::vector<int> ideal = labels;
        std::sort(ideal.begin(), ideal.end(), std::greater<int>());
        double idcg = 0;
        for (size_t p = 0; p < n; ++p)
            idcg += (std::pow(2.0, ideal[p]) - 1.0) / std::log2(static_cast<double>(p) + 2.0);

        delta_.assign(n, std::vector<double>(n, 0.0));
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) {
                double gain_i = std::pow(2.0, labels[i]) - 1.0;
                double gain_j = std::pow(2.0, labels[j]) - 1.0;
                double disc_i = 1.0 / std::log2(static_cast<double>(rank[i]) + 1.0);
                double disc_j = 1.0 / std::log2(static_cast<double>(rank[j]) + 1.0);
                delta_[i][j] = std::abs(gain_i - gain_j) * std::abs(disc_i - disc_j) / idcg;
            }
    }

    double value(const std::vector<double>& scores) const {
        double total = 0;
        for (size_t i = 0; i < labels_.size(); ++i) {
            if (labels_[i] <= 0) continue;
            for (size_t j = 0; j < labels_.size(); ++j) {
                if (labels_[j] > 0) continue;
                total += delta_[i][j] * std::log1p(std::exp(-(scores[i] - scores[j])));
            }
        }
        return total;
    }

    /// Central finite difference of the objective at `scores`.
    std::vector<double> gradient_fd(const std::vector<double>& scores, double h = 1e-6) const {
        std::vector<double> g(scores.size());
        for (size_t k = 0; k < scores.size(); ++k) {
            auto up = scores, down = scores;
            up[k] += h;
            down[k] -= h;
            g[k] = (value(up) - value(down)) / (2 * h);
        }
        return g;
    }

  private:
    std::vector<int> labels_;
    std::vector<std::vector<double>> delta_;
};

}  // namespace test_support
