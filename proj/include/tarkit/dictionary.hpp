#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tarkit/corpus.hpp"
#include "tarkit/error.hpp"
#include "tarkit/text.hpp"

namespace tarkit {

struct DictionaryConfig {
    size_t max_terms = 100000;
    double max_doc_freq_ratio = 0.5;  // terms in more than this fraction of docs are dropped
    uint64_t min_count = 10;          // terms with fewer total occurrences are dropped
};

/// The query/feature vocabulary: most frequent tokens surviving the document
/// frequency and minimum count filters.
class Dictionary {
  public:
    Dictionary() = default;
    Dictionary(std::vector<std::string> terms, DictionaryConfig config)
        : terms_(std::move(terms)), config_(config) {
        lookup_.reserve(terms_.size());
        for (const auto& t : terms_) lookup_.insert(t);
    }

    bool contains(const std::string& term) const { return lookup_.count(term) > 0; }
    size_t size() const { return terms_.size(); }
    /// Terms in selection order: descending corpus frequency, ties ascending.
    const std::vector<std::string>& terms() const { return terms_; }
    const DictionaryConfig& config() const { return config_; }

  private:
    std::vector<std::string> terms_;
    DictionaryConfig config_;
    std::unordered_set<std::string> lookup_;
};

namespace detail {
struct TermStats {
    uint64_t count = 0;  // total occurrences across the corpus
    uint64_t df = 0;     // documents containing the term
};
}  // namespace detail

/// First pass: fold token statistics over the corpus; second pass: filter and
/// truncate to the most frequent terms (ties broken lexicographically).
inline Dictionary build_dictionary(const Corpus& corpus, const DictionaryConfig& config = {}) {
    if (corpus.empty()) fail("cannot build a dictionary from an empty corpus");
    std::unordered_map<std::string, detail::TermStats> stats;
    std::unordered_set<std::string> seen_in_doc;
    for (const auto& doc : corpus.docs()) {
        seen_in_doc.clear();
        auto account = [&](const std::string& text) {
            for (auto& tok : tokenize(text)) {
                auto& s = stats[tok];
                ++s.count;
                if (seen_in_doc.insert(tok).second) ++s.df;
            }
        };
        account(doc.title);
        account(doc.abstract);
    }

    const double n = static_cast<double>(corpus.size());
    std::vector<std::pair<std::string, uint64_t>> surviving;
    for (const auto& [term, s] : stats) {
        if (static_cast<double>(s.df) / n > config.max_doc_freq_ratio) continue;
        if (s.count < config.min_count) continue;
        surviving.emplace_back(term, s.count);
    }
    std::sort(surviving.begin(), surviving.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (surviving.size() > config.max_terms) surviving.resize(config.max_terms);

    std::vector<std::string> terms;
    terms.reserve(surviving.size());
    for (auto& [term, count] : surviving) terms.push_back(std::move(term));
    return Dictionary(std::move(terms), config);
}

}  // namespace tarkit
