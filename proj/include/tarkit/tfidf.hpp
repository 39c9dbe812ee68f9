#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "tarkit/error.hpp"
#include "tarkit/index.hpp"

namespace tarkit {

/// Sparse vector as (column, value) pairs sorted by column.
using SparseVector = std::vector<std::pair<uint32_t, double>>;

inline double sparse_dot(const SparseVector& a, const SparseVector& b) {
    double s = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (ia->first < ib->first)
            ++ia;
        else if (ib->first < ia->first)
            ++ib;
        else {
            s += ia->second * ib->second;
            ++ia;
            ++ib;
        }
    }
    return s;
}

inline double sparse_norm(const SparseVector& a) {
    double s = 0;
    for (const auto& [col, v] : a) s += v * v;
    return std::sqrt(s);
}

inline double sparse_cosine(const SparseVector& a, const SparseVector& b) {
    double na = sparse_norm(a), nb = sparse_norm(b);
    if (na == 0 || nb == 0) return 0;
    return sparse_dot(a, b) / (na * nb);
}

/// Maps text to tf-idf vectors over the index dictionary: raw term counts
/// weighted by the index's smoothed idf. Column order follows dictionary
/// selection order.
class TfIdfVectorizer {
  public:
    TfIdfVectorizer() = default;

    static TfIdfVectorizer fit(const InvertedIndex& index) {
        TfIdfVectorizer v;
        const auto& terms = index.dictionary().terms();
        v.idf_.reserve(terms.size());
        v.columns_.reserve(terms.size());
        for (uint32_t col = 0; col < terms.size(); ++col) {
            v.columns_.emplace(terms[col], col);
            v.idf_.push_back(index.idf(terms[col]));
        }
        return v;
    }

    bool fitted() const { return !columns_.empty() || !idf_.empty(); }
    size_t vocabulary_size() const { return idf_.size(); }

    double idf(uint32_t column) const { return idf_.at(column); }

    SparseVector transform(const std::vector<std::string>& tokens) const {
        std::map<uint32_t, uint32_t> counts;
        for (const auto& t : tokens) {
            auto it = columns_.find(t);
            if (it != columns_.end()) ++counts[it->second];
        }
        SparseVector out;
        out.reserve(counts.size());
        for (auto [col, count] : counts)
            out.emplace_back(col, static_cast<double>(count) * idf_[col]);
        return out;
    }

    SparseVector transform_text(const std::string& text) const { return transform(tokenize(text)); }

  private:
    std::unordered_map<std::string, uint32_t> columns_;
    std::vector<double> idf_;
};

}  // namespace tarkit
