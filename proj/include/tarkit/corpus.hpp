#pragma once

#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "tarkit/error.hpp"
#include "tarkit/text.hpp"

namespace tarkit {

/// One candidate study. doc_id must be unique within a corpus and the title
/// non-empty after trimming; the abstract may be empty.
struct Document {
    std::string doc_id;
    std::string title;
    std::string abstract;
};

class Corpus {
  public:
    void add(Document doc) {
        if (doc.doc_id.empty()) fail("document with empty doc_id");
        if (trim(doc.title).empty()) fail("document " + doc.doc_id + " has an empty title");
        auto [it, inserted] = index_.emplace(doc.doc_id, docs_.size());
        if (!inserted) fail("duplicate doc_id: " + doc.doc_id);
        docs_.push_back(std::move(doc));
    }

    size_t size() const { return docs_.size(); }
    bool empty() const { return docs_.empty(); }
    const std::vector<Document>& docs() const { return docs_; }
    const Document& at(size_t i) const { return docs_[i]; }

    bool contains(const std::string& doc_id) const { return index_.count(doc_id) > 0; }

    const Document& by_id(const std::string& doc_id) const {
        auto it = index_.find(doc_id);
        if (it == index_.end()) fail("unknown doc_id: " + doc_id);
        return docs_[it->second];
    }

  private:
    std::vector<Document> docs_;
    std::unordered_map<std::string, size_t> index_;
};

/// JSON-lines corpus: one object per line with keys doc_id, title, abstract.
inline Corpus load_corpus_jsonl(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail("cannot open corpus file: " + path);
    Corpus corpus;
    std::string line;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            fail(path + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
        }
        if (!j.is_object() || !j.contains("doc_id") || !j.contains("title"))
            fail(path + ":" + std::to_string(line_no) + ": expected object with doc_id and title");
        Document doc;
        doc.doc_id = j.at("doc_id").get<std::string>();
        doc.title = j.at("title").get<std::string>();
        doc.abstract = j.value("abstract", std::string());
        try {
            corpus.add(std::move(doc));
        } catch (const Error& e) {
            fail(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return corpus;
}

inline void write_corpus_jsonl(const Corpus& corpus, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) fail("cannot write corpus file: " + path);
    for (const auto& doc : corpus.docs()) {
        nlohmann::json j{{"doc_id", doc.doc_id}, {"title", doc.title}, {"abstract", doc.abstract}};
        os << j.dump() << '\n';
    }
}

}  // namespace tarkit
