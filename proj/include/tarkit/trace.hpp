#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tarkit/error.hpp"
#include "tarkit/text.hpp"

namespace tarkit {

/// One reviewer judgment during a simulated or live screening run. `step` is
/// the retraining round that served the document (0 while bootstrapping);
/// `batch` is that round's batch size (the feedback step s, or the active
/// batch B for the incremental baseline; 0 while bootstrapping).
struct TraceRow {
    std::string topic_id;
    size_t step = 0;
    std::string doc_id;
    int label = 0;
    size_t judged = 0;  // |final_ranking| after this judgment
    size_t batch = 0;
};

inline void write_trace_csv(const std::vector<TraceRow>& rows, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) fail("cannot write trace file: " + path);
    os << "topic,step,doc_id,label,judged,batch\n";
    for (const auto& r : rows)
        os << r.topic_id << "," << r.step << "," << r.doc_id << "," << r.label << "," << r.judged
           << "," << r.batch << "\n";
    if (!os) fail("short write: " + path);
}

inline std::vector<TraceRow> load_trace_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail("cannot open trace file: " + path);
    std::string line;
    if (!std::getline(is, line)) fail("empty trace file: " + path);
    if (trim(line) != "topic,step,doc_id,label,judged,batch")
        fail(path + ": unexpected trace header: " + line);
    std::vector<TraceRow> rows;
    size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::istringstream ss(line);
        TraceRow r;
        std::string field;
        auto next = [&](const char* what) {
            if (!std::getline(ss, field, ','))
                fail(path + ":" + std::to_string(line_no) + ": missing column " + what);
            return field;
        };
        r.topic_id = next("topic");
        try {
            r.step = std::stoul(next("step"));
            r.doc_id = next("doc_id");
            r.label = std::stoi(next("label"));
            r.judged = std::stoul(next("judged"));
            r.batch = std::stoul(next("batch"));
        } catch (const std::exception&) {
            fail(path + ":" + std::to_string(line_no) + ": malformed trace row");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace tarkit
