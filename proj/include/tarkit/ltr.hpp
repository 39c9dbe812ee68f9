#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tarkit/error.hpp"
#include "tarkit/features.hpp"
#include "tarkit/io.hpp"
#include "tarkit/qrels.hpp"
#include "tarkit/run_file.hpp"

namespace tarkit {

struct LtrRow {
    FeatureVector features{};
    int label = 0;
    std::string doc_id;
};

struct LtrGroup {
    std::string topic_id;
    std::vector<LtrRow> rows;

    bool has_both_labels() const {
        bool pos = false, neg = false;
        for (const auto& r : rows) (r.label > 0 ? pos : neg) = true;
        return pos && neg;
    }
};

struct LtrParams {
    size_t n_trees = 100;
    double learning_rate = 0.3;
    size_t max_depth = 6;
    size_t min_child_rows = 1;
    size_t max_bins = 256;
};

/// Pairwise lambda gradients for one ranked group (Burges-style, sigma = 1).
/// Swapped-pair NDCG deltas use gain 2^label − 1 and log2 position discounts
/// over the full group. Requires both labels present.
inline void lambda_gradients(std::span<const double> scores, std::span<const int> labels,
                             std::span<double> gradients, std::span<double> hessians) {
    const size_t n = scores.size();
    if (labels.size() != n || gradients.size() != n || hessians.size() != n)
        fail("lambda gradients: size mismatch");
    bool pos = false, neg = false;
    for (int l : labels) (l > 0 ? pos : neg) = true;
    if (!pos || !neg) fail("lambda gradients: group needs both relevant and irrelevant rows");

    // Current ranking: score descending, row index ascending on ties.
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    std::vector<size_t> rank(n);  // 1-based position of each row
    for (size_t pos_i = 0; pos_i < n; ++pos_i) rank[order[pos_i]] = pos_i + 1;

    auto gain = [&](size_t i) { return std::pow(2.0, labels[i]) - 1.0; };
    auto discount = [](size_t position) { return 1.0 / std::log2(position + 1.0); };

    std::vector<int> ideal(labels.begin(), labels.end());
    std::sort(ideal.begin(), ideal.end(), std::greater<int>());
    double idcg = 0;
    for (size_t p = 0; p < n; ++p) idcg += (std::pow(2.0, ideal[p]) - 1.0) * discount(p + 1);

    std::fill(gradients.begin(), gradients.end(), 0.0);
    std::fill(hessians.begin(), hessians.end(), 0.0);
    for (size_t i = 0; i < n; ++i) {
        if (labels[i] <= 0) continue;
        for (size_t j = 0; j < n; ++j) {
            if (labels[j] > 0) continue;
            double delta = std::abs(gain(i) - gain(j)) *
                           std::abs(discount(rank[i]) - discount(rank[j])) / idcg;
            double rho = 1.0 / (1.0 + std::exp(scores[i] - scores[j]));
            gradients[i] -= rho * delta;
            gradients[j] += rho * delta;
            double curvature = rho * (1.0 - rho) * delta;
            hessians[i] += curvature;
            hessians[j] += curvature;
        }
    }
}

struct TreeNode {
    int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0;  // go left when x[feature] <= threshold
    int32_t left = -1;
    int32_t right = -1;
    double value = 0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> x) const {
        if (nodes.empty()) return 0;
        int32_t at = 0;
        while (nodes[at].feature >= 0)
            at = x[nodes[at].feature] <= nodes[at].threshold ? nodes[at].left : nodes[at].right;
        return nodes[at].value;
    }
};

/// Gradient-boosted ranking model. prediction = base_score +
/// learning_rate · Σ tree leaf values.
class LtrModel {
  public:
    LtrModel() { importance_.fill(0.0); }

    bool trained() const { return !trees_.empty(); }
    size_t tree_count() const { return trees_.size(); }
    double learning_rate() const { return learning_rate_; }
    double base_score() const { return base_score_; }
    const std::array<double, kFeatureCount>& importance_gain() const { return importance_; }

    double predict(std::span<const double> features) const {
        if (features.size() != kFeatureCount)
            fail("model expects " + std::to_string(kFeatureCount) + " features, got " +
                 std::to_string(features.size()));
        double s = base_score_;
        for (const auto& tree : trees_) s += learning_rate_ * tree.predict(features);
        return s;
    }

    /// Versioned JSON: params, per-feature gain totals, and tree structures
    /// with nodes flattened to [feature, threshold, left, right, value].
    void save(const std::string& path) const {
        nlohmann::json j;
        j["format"] = "ltr-model";
        j["version"] = 1;
        j["learning_rate"] = learning_rate_;
        j["base_score"] = base_score_;
        j["importance_gain"] = importance_;
        nlohmann::json trees = nlohmann::json::array();
        for (const auto& tree : trees_) {
            nlohmann::json nodes = nlohmann::json::array();
            for (const auto& n : tree.nodes)
                nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
            trees.push_back(std::move(nodes));
        }
        j["trees"] = std::move(trees);
        io::atomic_write_file(path, j.dump() + "\n");
    }

    static LtrModel load(const std::string& path) {
        std::ifstream is(path);
        if (!is) fail("cannot open model file: " + path);
        nlohmann::json j;
        try {
            is >> j;
        } catch (const nlohmann::json::exception& e) {
            fail(path + ": invalid model file: " + e.what());
        }
        if (j.value("format", std::string()) != "ltr-model") fail("not a model file: " + path);
        if (j.value("version", 0) != 1) fail("unsupported model version in " + path);
        LtrModel m;
        try {
            m.learning_rate_ = j.at("learning_rate").get<double>();
            m.base_score_ = j.at("base_score").get<double>();
            const auto& gains = j.at("importance_gain");
            if (gains.size() != kFeatureCount) fail("bad importance length in " + path);
            for (size_t i = 0; i < kFeatureCount; ++i) m.importance_[i] = gains[i].get<double>();
            for (const auto& nodes : j.at("trees")) {
                RegressionTree tree;
                for (const auto& n : nodes) {
                    if (n.size() != 5) fail("bad tree node in " + path);
                    tree.nodes.push_back({n[0].get<int32_t>(), n[1].get<double>(),
                                          n[2].get<int32_t>(), n[3].get<int32_t>(),
                                          n[4].get<double>()});
                }
                m.trees_.push_back(std::move(tree));
            }
        } catch (const nlohmann::json::exception& e) {
            fail(path + ": invalid model file: " + e.what());
        }
        return m;
    }

  private:
    friend LtrModel train_ltr(const std::vector<LtrGroup>&, const LtrParams&);
    std::vector<RegressionTree> trees_;
    double learning_rate_ = 0.3;
    double base_score_ = 0;
    std::array<double, kFeatureCount> importance_;
};

namespace detail {

/// Bin boundaries at empirical-CDF quantiles over distinct values, so the
/// binning is invariant under duplicating the dataset. A value goes to bin k
/// iff it is <= boundaries[k] (and to the last bin beyond the end).
inline std::vector<double> quantile_boundaries(std::vector<double> values, size_t max_bins) {
    std::sort(values.begin(), values.end());
    std::vector<std::pair<double, size_t>> distinct;  // value, cumulative count
    for (double v : values) {
        if (distinct.empty() || distinct.back().first != v)
            distinct.emplace_back(v, 0);
        ++distinct.back().second;
    }
    size_t total = values.size();
    size_t cum = 0;
    for (auto& [v, c] : distinct) {
        cum += c;
        c = cum;
    }
    if (distinct.size() <= max_bins) {
        std::vector<double> bounds;
        bounds.reserve(distinct.size());
        for (size_t i = 0; i + 1 < distinct.size(); ++i) bounds.push_back(distinct[i].first);
        return bounds;  // one bin per distinct value
    }
    std::vector<double> bounds;
    bounds.reserve(max_bins - 1);
    size_t at = 0;
    for (size_t k = 1; k < max_bins; ++k) {
        // smallest distinct value whose cumulative share reaches k/max_bins
        double target = static_cast<double>(k) * static_cast<double>(total) /
                        static_cast<double>(max_bins);
        while (at < distinct.size() && static_cast<double>(distinct[at].second) < target) ++at;
        if (at + 1 >= distinct.size()) break;
        if (!bounds.empty() && bounds.back() == distinct[at].first) continue;
        bounds.push_back(distinct[at].first);
    }
    return bounds;
}

struct BoostingData {
    size_t n_rows = 0;
    std::vector<std::vector<uint16_t>> bins;        // [feature][row]
    std::vector<std::vector<double>> boundaries;    // [feature][bin upper edge]
    std::vector<std::pair<size_t, size_t>> groups;  // row ranges
    std::vector<int> labels;
};

struct SplitChoice {
    double gain = 0;
    int feature = -1;
    uint16_t bin = 0;
    bool valid() const { return feature >= 0; }
};

class TreeGrower {
  public:
    TreeGrower(const BoostingData& data, const LtrParams& params,
               const std::vector<double>& gradients, const std::vector<double>& hessians)
        : data_(data), params_(params), g_(gradients), h_(hessians) {}

    /// Grows one tree; returns it together with per-row predictions and
    /// accumulates split gains into `importance`.
    RegressionTree grow(std::vector<double>& row_values,
                        std::array<double, kFeatureCount>& importance) {
        RegressionTree tree;
        std::vector<size_t> rows(data_.n_rows);
        std::iota(rows.begin(), rows.end(), 0);
        tree.nodes.emplace_back();
        build(tree, 0, std::move(rows), 0, importance, row_values);
        return tree;
    }

  private:
    static double safe_ratio(double g, double h) { return h > 0 ? g * g / h : 0.0; }

    void build(RegressionTree& tree, size_t node, std::vector<size_t> rows, size_t depth,
               std::array<double, kFeatureCount>& importance, std::vector<double>& row_values) {
        // midpoint-split reductions keep training invariant under dataset
        // duplication: doubled inputs produce exactly doubled sums
        node_g_.resize(rows.size());
        node_h_.resize(rows.size());
        for (size_t i = 0; i < rows.size(); ++i) {
            node_g_[i] = g_[rows[i]];
            node_h_[i] = h_[rows[i]];
        }
        double g_sum = pairwise_sum(node_g_);
        double h_sum = pairwise_sum(node_h_);
        SplitChoice best;
        if (depth < params_.max_depth && rows.size() >= 2 * params_.min_child_rows)
            best = find_split(rows, g_sum, h_sum);

        if (!best.valid()) {
            double value = h_sum > 0 ? -g_sum / h_sum : 0.0;
            tree.nodes[node].feature = -1;
            tree.nodes[node].value = value;
            for (size_t r : rows) row_values[r] = value;
            return;
        }

        importance[best.feature] += best.gain;
        std::vector<size_t> left_rows, right_rows;
        for (size_t r : rows) {
            if (data_.bins[best.feature][r] <= best.bin)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        tree.nodes[node].feature = best.feature;
        tree.nodes[node].threshold = data_.boundaries[best.feature][best.bin];
        int32_t left = static_cast<int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        int32_t right = static_cast<int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[node].left = left;
        tree.nodes[node].right = right;
        build(tree, left, std::move(left_rows), depth + 1, importance, row_values);
        build(tree, right, std::move(right_rows), depth + 1, importance, row_values);
    }

    SplitChoice find_split(const std::vector<size_t>& rows, double g_sum, double h_sum) {
        SplitChoice best;
        double parent = safe_ratio(g_sum, h_sum);
        for (size_t f = 0; f < kFeatureCount; ++f) {
            size_t n_bins = data_.boundaries[f].size() + 1;
            if (n_bins < 2) continue;
            // bucket rows by bin preserving row order, then reduce each
            // segment with the duplication-exact midpoint scheme
            hist_n_.assign(n_bins, 0);
            for (size_t r : rows) ++hist_n_[data_.bins[f][r]];
            offsets_.assign(n_bins + 1, 0);
            for (size_t b = 0; b < n_bins; ++b) offsets_[b + 1] = offsets_[b] + hist_n_[b];
            seg_g_.resize(rows.size());
            seg_h_.resize(rows.size());
            cursor_ = offsets_;
            for (size_t r : rows) {
                size_t at = cursor_[data_.bins[f][r]]++;
                seg_g_[at] = g_[r];
                seg_h_[at] = h_[r];
            }
            hist_g_.resize(n_bins);
            hist_h_.resize(n_bins);
            for (size_t b = 0; b < n_bins; ++b) {
                hist_g_[b] = pairwise_sum({seg_g_.data() + offsets_[b], hist_n_[b]});
                hist_h_[b] = pairwise_sum({seg_h_.data() + offsets_[b], hist_n_[b]});
            }
            double gl = 0, hl = 0;
            size_t nl = 0;
            for (size_t b = 0; b + 1 < n_bins; ++b) {
                gl += hist_g_[b];
                hl += hist_h_[b];
                nl += hist_n_[b];
                size_t nr = rows.size() - nl;
                if (nl < params_.min_child_rows || nr < params_.min_child_rows) continue;
                double gain =
                    0.5 * (safe_ratio(gl, hl) + safe_ratio(g_sum - gl, h_sum - hl) - parent);
                if (gain > best.gain + 1e-12) {
                    best.gain = gain;
                    best.feature = static_cast<int>(f);
                    best.bin = static_cast<uint16_t>(b);
                }
            }
        }
        return best;
    }

    const BoostingData& data_;
    const LtrParams& params_;
    const std::vector<double>& g_;
    const std::vector<double>& h_;
    std::vector<double> hist_g_, hist_h_, node_g_, node_h_, seg_g_, seg_h_;
    std::vector<size_t> hist_n_, offsets_, cursor_;
};

}  // namespace detail

/// Trains the boosted ranker on per-topic groups. Groups lacking either label
/// must be filtered beforehand (see prepare_groups); training is fully
/// deterministic.
inline LtrModel train_ltr(const std::vector<LtrGroup>& groups, const LtrParams& params = {}) {
    if (groups.empty()) fail("ltr training requires at least one group with both labels");
    for (const auto& g : groups)
        if (!g.has_both_labels())
            fail("ltr training group " + g.topic_id + " lacks a label class");

    detail::BoostingData data;
    for (const auto& g : groups) {
        size_t start = data.labels.size();
        for (const auto& row : g.rows) data.labels.push_back(row.label);
        data.groups.emplace_back(start, data.labels.size());
    }
    data.n_rows = data.labels.size();

    // Per-feature quantile bins over the whole training set.
    data.bins.assign(kFeatureCount, {});
    data.boundaries.assign(kFeatureCount, {});
    {
        std::vector<double> column(data.n_rows);
        for (size_t f = 0; f < kFeatureCount; ++f) {
            size_t at = 0;
            for (const auto& g : groups)
                for (const auto& row : g.rows) column[at++] = row.features[f];
            data.boundaries[f] = detail::quantile_boundaries(column, params.max_bins);
            auto& bins = data.bins[f];
            bins.resize(data.n_rows);
            const auto& bounds = data.boundaries[f];
            for (size_t r = 0; r < data.n_rows; ++r) {
                auto it = std::lower_bound(bounds.begin(), bounds.end(), column[r]);
                bins[r] = static_cast<uint16_t>(it - bounds.begin());
            }
        }
    }

    LtrModel model;
    model.learning_rate_ = params.learning_rate;
    model.base_score_ = 0;

    std::vector<double> scores(data.n_rows, model.base_score_);
    std::vector<double> gradients(data.n_rows), hessians(data.n_rows);
    std::vector<double> row_values(data.n_rows);

    for (size_t t = 0; t < params.n_trees; ++t) {
        for (auto [start, end] : data.groups) {
            size_t len = end - start;
            lambda_gradients({scores.data() + start, len}, {data.labels.data() + start, len},
                             {gradients.data() + start, len}, {hessians.data() + start, len});
        }
        detail::TreeGrower grower(data, params, gradients, hessians);
        model.trees_.push_back(grower.grow(row_values, model.importance_));
        for (size_t r = 0; r < data.n_rows; ++r)
            scores[r] += params.learning_rate * row_values[r];
    }
    return model;
}

/// Drops groups lacking either label, reporting each through `warn`.
inline std::vector<LtrGroup> prepare_groups(std::vector<LtrGroup> groups,
                                            const std::function<void(const std::string&)>& warn) {
    std::vector<LtrGroup> kept;
    for (auto& g : groups) {
        if (g.has_both_labels())
            kept.push_back(std::move(g));
        else if (warn)
            warn("dropping training group " + g.topic_id + ": needs both labels");
    }
    return kept;
}

/// Builds one training group from a topic's feature matrix and judgments.
inline LtrGroup make_group(const FeatureMatrix& features, const Qrels& qrels) {
    LtrGroup g;
    g.topic_id = features.topic_id;
    g.rows.reserve(features.rows());
    for (size_t i = 0; i < features.rows(); ++i) {
        LtrRow row;
        auto span = features.row(i);
        std::copy(span.begin(), span.end(), row.features.begin());
        row.doc_id = features.doc_ids[i];
        row.label = qrels.label(features.topic_id, row.doc_id) > 0 ? 1 : 0;
        g.rows.push_back(std::move(row));
    }
    return g;
}

/// Scores a topic's candidates and returns them ranked (score descending,
/// doc_id ascending on ties).
inline RankedList rank_with_model(const LtrModel& model, const FeatureMatrix& features) {
    RankedList out;
    out.topic_id = features.topic_id;
    out.entries.reserve(features.rows());
    for (size_t i = 0; i < features.rows(); ++i)
        out.entries.push_back({features.doc_ids[i], model.predict(features.row(i))});
    std::sort(out.entries.begin(), out.entries.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    return out;
}

struct ImportanceEntry {
    size_t feature = 0;  // zero-based position in the vector
    std::string name;
    double gain = 0;
};

/// Total split gain per feature, sorted descending (name ascending on ties).
inline std::vector<ImportanceEntry> feature_importance(const LtrModel& model) {
    std::vector<ImportanceEntry> out;
    out.reserve(kFeatureCount);
    for (size_t f = 0; f < kFeatureCount; ++f)
        out.push_back({f, feature_names()[f], model.importance_gain()[f]});
    std::sort(out.begin(), out.end(), [](const ImportanceEntry& a, const ImportanceEntry& b) {
        if (a.gain != b.gain) return a.gain > b.gain;
        return a.feature < b.feature;
    });
    return out;
}

}  // namespace tarkit
