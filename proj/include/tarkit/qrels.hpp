#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "tarkit/error.hpp"
#include "tarkit/text.hpp"

namespace tarkit {

/// Relevance judgments, grouped by topic. Labels are binary: anything greater
/// than zero counts as relevant.
class Qrels {
  public:
    void add(const std::string& topic_id, const std::string& doc_id, int label) {
        auto& topic = topics_[topic_id];
        auto [it, inserted] = topic.emplace(doc_id, label > 0 ? 1 : 0);
        if (!inserted)
            fail("duplicate judgment for topic " + topic_id + ", doc " + doc_id);
    }

    bool has_topic(const std::string& topic_id) const { return topics_.count(topic_id) > 0; }

    const std::map<std::string, int>& labels(const std::string& topic_id) const {
        auto it = topics_.find(topic_id);
        if (it == topics_.end()) fail("unknown topic_id: " + topic_id);
        return it->second;
    }

    /// Label for one document; unjudged documents are treated as irrelevant.
    int label(const std::string& topic_id, const std::string& doc_id) const {
        const auto& m = labels(topic_id);
        auto it = m.find(doc_id);
        return it == m.end() ? 0 : it->second;
    }

    size_t relevant_count(const std::string& topic_id) const {
        size_t n = 0;
        for (const auto& [doc, label] : labels(topic_id))
            if (label > 0) ++n;
        return n;
    }

    std::vector<std::string> topic_ids() const {
        std::vector<std::string> out;
        out.reserve(topics_.size());
        for (const auto& [topic, _] : topics_) out.push_back(topic);
        return out;
    }

    size_t topic_count() const { return topics_.size(); }

  private:
    std::map<std::string, std::map<std::string, int>> topics_;
};

/// Reads judgments in the common four-column text format:
/// `topic_id <ignored> doc_id label`, whitespace-separated, one per line.
inline Qrels load_qrels(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail("cannot open qrels file: " + path);
    Qrels qrels;
    std::string line;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::istringstream ss(line);
        std::string topic, iteration, doc, label_str;
        if (!(ss >> topic >> iteration >> doc >> label_str))
            fail(path + ":" + std::to_string(line_no) + ": expected 4 columns");
        std::string rest;
        if (ss >> rest) fail(path + ":" + std::to_string(line_no) + ": trailing columns");
        int label = 0;
        try {
            size_t pos = 0;
            label = std::stoi(label_str, &pos);
            if (pos != label_str.size()) throw std::invalid_argument(label_str);
        } catch (const std::exception&) {
            fail(path + ":" + std::to_string(line_no) + ": bad label: " + label_str);
        }
        try {
            qrels.add(topic, doc, label);
        } catch (const Error& e) {
            fail(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return qrels;
}

inline void write_qrels(const Qrels& qrels, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) fail("cannot write qrels file: " + path);
    for (const auto& topic : qrels.topic_ids())
        for (const auto& [doc, label] : qrels.labels(topic))
            os << topic << " 0 " << doc << " " << label << "\n";
    if (!os) fail("short write: " + path);
}

}  // namespace tarkit
