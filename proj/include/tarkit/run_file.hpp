#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tarkit/error.hpp"
#include "tarkit/text.hpp"

namespace tarkit {

struct ScoredDoc {
    std::string doc_id;
    double score = 0;
};

/// An ordered ranking of documents for one topic. Order of `entries` is the
/// ranking; scores are informational and need not be distinct.
struct RankedList {
    std::string topic_id;
    std::vector<ScoredDoc> entries;

    size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }

    std::vector<std::string> doc_ids() const {
        std::vector<std::string> out;
        out.reserve(entries.size());
        for (const auto& e : entries) out.push_back(e.doc_id);
        return out;
    }

    void truncate(size_t k) {
        if (entries.size() > k) entries.resize(k);
    }
};

/// Writes rankings in the classic six-column run format:
/// `topic Q0 doc_id rank score tag`. Ranks are 1-based in list order.
inline void write_run_file(const std::vector<RankedList>& runs, const std::string& path,
                           const std::string& tag) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) fail("cannot write run file: " + path);
    os.precision(9);
    for (const auto& run : runs) {
        size_t rank = 1;
        for (const auto& e : run.entries)
            os << run.topic_id << " Q0 " << e.doc_id << " " << rank++ << " " << e.score << " "
               << tag << "\n";
    }
    if (!os) fail("short write: " + path);
}

/// Reads a six-column run file back into per-topic rankings, preserving file
/// order within each topic. Ranks must be 1-based and consecutive per topic.
inline std::vector<RankedList> load_run_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail("cannot open run file: " + path);
    std::vector<RankedList> runs;
    std::map<std::string, size_t> topic_pos;
    std::string line;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::istringstream ss(line);
        std::string topic, q0, doc, tag;
        size_t rank = 0;
        double score = 0;
        if (!(ss >> topic >> q0 >> doc >> rank >> score >> tag))
            fail(path + ":" + std::to_string(line_no) + ": expected 6 columns");
        auto [it, inserted] = topic_pos.emplace(topic, runs.size());
        if (inserted) runs.push_back(RankedList{topic, {}});
        RankedList& run = runs[it->second];
        if (rank != run.entries.size() + 1)
            fail(path + ":" + std::to_string(line_no) + ": rank " + std::to_string(rank) +
                 " out of order for topic " + topic);
        run.entries.push_back(ScoredDoc{doc, score});
    }
    return runs;
}

}  // namespace tarkit
