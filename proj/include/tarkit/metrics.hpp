#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "tarkit/error.hpp"
#include "tarkit/math.hpp"
#include "tarkit/qrels.hpp"
#include "tarkit/run_file.hpp"
#include "tarkit/trace.hpp"

namespace tarkit {

inline const std::vector<size_t>& default_thresholds() {
    static const std::vector<size_t> t =
        {10, 50, 100, 5000};
    return t;
}

/// Fraction of the relevant set found in the top `threshold` ranks.
inline double recall_at(const std::vector<std::string>& ranking,
                        const std::set<std::string>& relevant, size_t threshold) {
    if (threshold < 1) fail("recall threshold must be >= 1");
    if (relevant.empty()) fail("recall undefined: no relevant documents");
    size_t found = 0;
    size_t depth = std::min(threshold, ranking.size());
    for (size_t i = 0; i < depth; ++i)
        if (relevant.count(ranking[i])) ++found;
    return static_cast<double>(found) / static_cast<double>(relevant.size());
}

/// Mean over the relevant set of precision at each relevant document's rank;
/// relevant documents absent from the ranking contribute 0.
inline double average_precision(const std::vector<std::string>& ranking,
                                const std::set<std::string>& relevant) {
    if (relevant.empty()) fail("average precision undefined: no relevant documents");
    double sum = 0;
    size_t found = 0;
    for (size_t i = 0; i < ranking.size(); ++i) {
        if (!relevant.count(ranking[i])) continue;
        ++found;
        sum += static_cast<double>(found) / static_cast<double>(i + 1);
    }
    return sum / static_cast<double>(relevant.size());
}

/// 1-based rank of the deepest relevant document. Every relevant document
/// must appear in the ranking.
inline size_t last_rel(const std::vector<std::string>& ranking,
                       const std::set<std::string>& relevant) {
    if (relevant.empty()) fail("last_rel undefined: no relevant documents");
    size_t deepest = 0;
    size_t found = 0;
    for (size_t i = 0; i < ranking.size(); ++i)
        if (relevant.count(ranking[i])) {
            deepest = i + 1;
            ++found;
        }
    if (found != relevant.size())
        fail("ranking does not reach 100% recall: " +
             std::to_string(relevant.size() - found) + " relevant documents missing");
    return deepest;
}

/// Work saved over sampling at 100% recall: (n − last_rel)/n.
inline double wss100(const std::vector<std::string>& ranking,
                     const std::set<std::string>& relevant, size_t n) {
    size_t deepest = last_rel(ranking, relevant);
    if (n < deepest) fail("candidate count smaller than last relevant rank");
    return static_cast<double>(n - deepest) / static_cast<double>(n);
}

struct TopicMetrics {
    std::map<size_t, double> recall;  // threshold → value
    double ap = 0;
    double wss = 0;
    size_t last_relevant = 0;
    size_t n = 0;
};

struct MetricsReport {
    std::map<std::string, TopicMetrics> per_topic;
    std::map<size_t, double> macro_recall;
    double macro_ap = 0;
    double macro_wss = 0;
    double macro_last_rel = 0;
    std::vector<std::string> skipped_topics;  // zero-relevant topics
    std::vector<size_t> thresholds;
};

inline TopicMetrics evaluate_ranking(const RankedList& run, const std::set<std::string>& relevant,
                                     const std::vector<size_t>& thresholds) {
    TopicMetrics m;
    m.n = run.size();
    auto ids = run.doc_ids();
    for (size_t t : thresholds) m.recall[t] = recall_at(ids, relevant, t);
    m.ap = average_precision(ids, relevant);
    m.last_relevant = last_rel(ids, relevant);
    m.wss = wss100(ids, relevant, m.n);
    return m;
}

inline std::set<std::string> relevant_set(const Qrels& qrels, const std::string& topic_id) {
    std::set<std::string> out;
    if (!qrels.has_topic(topic_id)) return out;
    for (const auto& [doc, label] : qrels.labels(topic_id))
        if (label > 0) out.insert(doc);
    return out;
}

/// Macro-averaged metrics over per-topic runs. Topics with no relevant
/// documents are skipped and listed in the report.
inline MetricsReport evaluate_runs(const std::vector<RankedList>& runs, const Qrels& qrels,
                                   const std::vector<size_t>& thresholds = default_thresholds()) {
    MetricsReport report;
    report.thresholds = thresholds;
    for (const auto& run : runs) {
        auto relevant = relevant_set(qrels, run.topic_id);
        if (relevant.empty()) {
            report.skipped_topics.push_back(run.topic_id);
            continue;
        }
        report.per_topic[run.topic_id] = evaluate_ranking(run, relevant, thresholds);
    }
    size_t count = report.per_topic.size();
    if (count == 0) return report;
    for (size_t t : thresholds) report.macro_recall[t] = 0;
    for (const auto& [topic, m] : report.per_topic) {
        for (size_t t : thresholds) report.macro_recall[t] += m.recall.at(t);
        report.macro_ap += m.ap;
        report.macro_wss += m.wss;
        report.macro_last_rel += static_cast<double>(m.last_relevant);
    }
    for (size_t t : thresholds) report.macro_recall[t] /= static_cast<double>(count);
    report.macro_ap /= static_cast<double>(count);
    report.macro_wss /= static_cast<double>(count);
    report.macro_last_rel /= static_cast<double>(count);
    return report;
}

inline nlohmann::json report_to_json(const MetricsReport& report) {
    nlohmann::json j;
    j["topics"] = nlohmann::json::object();
    for (const auto& [topic, m] : report.per_topic) {
        nlohmann::json t;
        for (const auto& [threshold, value] : m.recall)
            t["recall@" + std::to_string(threshold)] = value;
        t["map"] = m.ap;
        t["wss@100"] = m.wss;
        t["last_rel"] = m.last_relevant;
        t["n"] = m.n;
        j["topics"][topic] = t;
    }
    nlohmann::json macro;
    for (const auto& [threshold, value] : report.macro_recall)
        macro["recall@" + std::to_string(threshold)] = value;
    macro["map"] = report.macro_ap;
    macro["wss@100"] = report.macro_wss;
    macro["last_rel"] = report.macro_last_rel;
    macro["topics"] = report.per_topic.size();
    j["macro"] = macro;
    j["skipped_topics"] = report.skipped_topics;
    return j;
}

struct CurvePoint {
    size_t judged = 0;
    double mean_recall = 0;
    double ci_low = 0;
    double ci_high = 0;
    size_t topics = 0;
};

/// Pointwise macro recall after each of the first `depth` judgments, with a
/// normal-approximation 95% confidence interval (sample stdev). Topics whose
/// trace is shorter than `depth` carry their final recall forward.
inline std::vector<CurvePoint> recall_curve(
    const std::map<std::string, std::vector<TraceRow>>& traces_by_topic, const Qrels& qrels,
    size_t depth = 200) {
    std::map<std::string, std::vector<double>> per_topic_curves;
    for (const auto& [topic, rows] : traces_by_topic) {
        auto relevant = relevant_set(qrels, topic);
        if (relevant.empty()) continue;
        std::vector<double> curve;
        curve.reserve(depth);
        size_t found = 0;
        for (size_t i = 0; i < depth; ++i) {
            if (i < rows.size() && relevant.count(rows[i].doc_id)) ++found;
            curve.push_back(static_cast<double>(found) / static_cast<double>(relevant.size()));
        }
        per_topic_curves[topic] = std::move(curve);
    }

    std::vector<CurvePoint> out;
    if (per_topic_curves.empty()) return out;
    size_t t_count = per_topic_curves.size();
    out.reserve(depth);
    std::vector<double> values(t_count);
    for (size_t i = 0; i < depth; ++i) {
        size_t at = 0;
        for (const auto& [topic, curve] : per_topic_curves) values[at++] = curve[i];
        double m = mean(values);
        double sd = 0;
        if (t_count > 1) {
            double acc = 0;
            for (double v : values) acc += (v - m) * (v - m);
            sd = std::sqrt(acc / static_cast<double>(t_count - 1));
        }
        double half = 1.96 * sd / std::sqrt(static_cast<double>(t_count));
        out.push_back({i + 1, m, std::max(0.0, m - half), std::min(1.0, m + half), t_count});
    }
    return out;
}

inline void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) fail("cannot write curve file: " + path);
    os << "judged,mean_recall,ci_low,ci_high,topics\n";
    os.precision(10);
    for (const auto& p : curve)
        os << p.judged << "," << p.mean_recall << "," << p.ci_low << "," << p.ci_high << ","
           << p.topics << "\n";
    if (!os) fail("short write: " + path);
}

struct ComparisonRow {
    std::string name;
    std::map<size_t, double> recall;
    double ap = 0;
    double wss = 0;
    double last_relevant = 0;
};

struct ComparisonTable {
    std::vector<size_t> thresholds;
    std::vector<ComparisonRow> rows;
    // best[column] = row index; columns: one per threshold, then map, wss,
    // last_rel (lower is better for last_rel only).
    std::vector<size_t> best;
};

/// Aligns named reports into one table and flags the best value per column.
/// All reports must cover the same topics.
inline ComparisonTable compare_reports(
    const std::vector<std::pair<std::string, MetricsReport>>& reports) {
    if (reports.empty()) fail("comparison needs at least one report");
    ComparisonTable table;
    table.thresholds = reports.front().second.thresholds;

    std::set<std::string> base_topics;
    for (const auto& [topic, m] : reports.front().second.per_topic) base_topics.insert(topic);
    for (const auto& [name, report] : reports) {
        std::set<std::string> topics;
        for (const auto& [topic, m] : report.per_topic) topics.insert(topic);
        if (topics != base_topics) fail("comparison reports cover different topic sets");
        if (report.thresholds != table.thresholds)
            fail("comparison reports use different thresholds");
        ComparisonRow row;
        row.name = name;
        row.recall = report.macro_recall;
        row.ap = report.macro_ap;
        row.wss = report.macro_wss;
        row.last_relevant = report.macro_last_rel;
        table.rows.push_back(std::move(row));
    }

    size_t n_cols = table.thresholds.size() + 3;
    table.best.assign(n_cols, 0);
    for (size_t r = 1; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        for (size_t c = 0; c < table.thresholds.size(); ++c)
            if (row.recall.at(table.thresholds[c]) >
                table.rows[table.best[c]].recall.at(table.thresholds[c]))
                table.best[c] = r;
        size_t c = table.thresholds.size();
        if (row.ap > table.rows[table.best[c]].ap) table.best[c] = r;
        if (row.wss > table.rows[table.best[c + 1]].wss) table.best[c + 1] = r;
        if (row.last_relevant < table.rows[table.best[c + 2]].last_relevant)
            table.best[c + 2] = r;
    }
    return table;
}

inline std::string comparison_to_csv(const ComparisonTable& table) {
    std::ostringstream os;
    os.precision(6);
    os << "system";
    for (size_t t : table.thresholds) os << ",recall@" << t;
    os << ",map,wss@100,last_rel\n";
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        os << row.name;
        size_t c = 0;
        for (size_t t : table.thresholds) {
            os << "," << std::fixed << row.recall.at(t);
            if (table.best[c++] == r) os << "*";
        }
        os << "," << row.ap;
        if (table.best[c++] == r) os << "*";
        os << "," << row.wss;
        if (table.best[c++] == r) os << "*";
        os << "," << row.last_relevant;
        if (table.best[c++] == r) os << "*";
        os << "\n";
    }
    return os.str();
}

}  // namespace tarkit
