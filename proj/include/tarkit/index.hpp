#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tarkit/dictionary.hpp"
#include "tarkit/error.hpp"
#include "tarkit/io.hpp"
#include "tarkit/text.hpp"

namespace tarkit {

enum class Field { title, abstract, both };

inline const char* field_name(Field f) {
    switch (f) {
        case Field::title: return "title";
        case Field::abstract: return "abstract";
        case Field::both: return "title+abstract";
    }
    return "?";
}

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct Posting {
    uint32_t doc = 0;  // internal document index
    uint32_t tf_title = 0;
    uint32_t tf_abstract = 0;

    uint32_t tf(Field f) const {
        switch (f) {
            case Field::title: return tf_title;
            case Field::abstract: return tf_abstract;
            case Field::both: return tf_title + tf_abstract;
        }
        return 0;
    }
};

struct TermPostings {
    std::vector<Posting> entries;  // sorted by doc
    uint32_t df_title = 0;
    uint32_t df_abstract = 0;
    uint32_t df_both() const { return static_cast<uint32_t>(entries.size()); }

    uint32_t df(Field f) const {
        switch (f) {
            case Field::title: return df_title;
            case Field::abstract: return df_abstract;
            case Field::both: return df_both();
        }
        return 0;
    }
};

/// Immutable inverted index over a corpus, restricted to dictionary terms.
/// Document lengths count all tokens of the field, not just indexed ones.
/// Safe for unrestricted concurrent reads once built.
class InvertedIndex {
  public:
    InvertedIndex() = default;

    size_t doc_count() const { return doc_ids_.size(); }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    const Dictionary& dictionary() const { return dict_; }

    bool has_doc(const std::string& doc_id) const { return id_to_idx_.count(doc_id) > 0; }

    uint32_t doc_index(const std::string& doc_id) const {
        auto it = id_to_idx_.find(doc_id);
        if (it == id_to_idx_.end()) fail("unknown doc_id: " + doc_id);
        return it->second;
    }

    uint32_t field_length(uint32_t doc, Field f) const {
        switch (f) {
            case Field::title: return len_title_[doc];
            case Field::abstract: return len_abstract_[doc];
            case Field::both: return len_title_[doc] + len_abstract_[doc];
        }
        return 0;
    }

    double avg_field_length(Field f) const {
        switch (f) {
            case Field::title: return avg_title_;
            case Field::abstract: return avg_abstract_;
            case Field::both: return avg_both_;
        }
        return 0;
    }

    const TermPostings* postings(const std::string& term) const {
        auto it = postings_.find(term);
        return it == postings_.end() ? nullptr : &it->second;
    }

    /// Smoothed idf: ln((N - df + 0.5)/(df + 0.5) + 1), always positive.
    /// df is the document frequency over title+abstract; unseen terms use df=0.
    double idf(const std::string& term) const { return idf_for_df(postings_df(term, Field::both)); }

    double idf_for_df(uint32_t df) const {
        double n = static_cast<double>(doc_count());
        return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
    }

    /// BM25 of the query against one document field. Duplicate query tokens
    /// count once. Unknown doc_id is an error; no matching term scores 0.
    double bm25(std::span<const std::string> query_tokens, const std::string& doc_id, Field f,
                const Bm25Params& params = {}) const {
        uint32_t doc = doc_index(doc_id);
        return bm25_by_index(query_tokens, doc, f, params);
    }

    double bm25_by_index(std::span<const std::string> query_tokens, uint32_t doc, Field f,
                         const Bm25Params& params = {}) const {
        double score = 0;
        std::unordered_set<std::string_view> seen;
        for (const auto& term : query_tokens) {
            if (!seen.insert(term).second) continue;
            const TermPostings* tp = postings(term);
            if (!tp) continue;
            auto it = std::lower_bound(tp->entries.begin(), tp->entries.end(), doc,
                                       [](const Posting& p, uint32_t d) { return p.doc < d; });
            if (it == tp->entries.end() || it->doc != doc) continue;
            uint32_t tf = it->tf(f);
            if (tf == 0) continue;
            score += idf_for_df(tp->df(f)) * saturation(tf, field_length(doc, f), f, params);
        }
        return score;
    }

    /// Term-at-a-time scoring of every matching document; used by retrieval.
    /// Returns (doc index, score) for all documents with score > 0.
    std::vector<std::pair<uint32_t, double>> score_all(std::span<const std::string> query_tokens,
                                                       Field f,
                                                       const Bm25Params& params = {}) const {
        std::unordered_map<uint32_t, double> acc;
        std::unordered_set<std::string_view> seen;
        for (const auto& term : query_tokens) {
            if (!seen.insert(term).second) continue;
            const TermPostings* tp = postings(term);
            if (!tp) continue;
            double idf = idf_for_df(tp->df(f));
            for (const Posting& p : tp->entries) {
                uint32_t tf = p.tf(f);
                if (tf == 0) continue;
                acc[p.doc] += idf * saturation(tf, field_length(p.doc, f), f, params);
            }
        }
        std::vector<std::pair<uint32_t, double>> out;
        out.reserve(acc.size());
        for (auto [doc, score] : acc)
            if (score > 0) out.emplace_back(doc, score);
        return out;
    }

    void save(const std::string& path) const {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os) fail("cannot write index file: " + path);
        os.write(kMagic, 8);
        io::write_u32(os, kVersion);
        // dictionary
        io::write_u64(os, dict_.config().max_terms);
        io::write_f64(os, dict_.config().max_doc_freq_ratio);
        io::write_u64(os, dict_.config().min_count);
        io::write_u64(os, dict_.size());
        for (const auto& t : dict_.terms()) io::write_string(os, t);
        // documents
        io::write_u64(os, doc_ids_.size());
        for (size_t i = 0; i < doc_ids_.size(); ++i) {
            io::write_string(os, doc_ids_[i]);
            io::write_u32(os, len_title_[i]);
            io::write_u32(os, len_abstract_[i]);
        }
        // postings
        io::write_u64(os, postings_.size());
        std::vector<const std::string*> terms;
        terms.reserve(postings_.size());
        for (const auto& [term, tp] : postings_) terms.push_back(&term);
        std::sort(terms.begin(), terms.end(), [](auto* a, auto* b) { return *a < *b; });
        for (const auto* term : terms) {
            const TermPostings& tp = postings_.at(*term);
            io::write_string(os, *term);
            io::write_u64(os, tp.entries.size());
            for (const Posting& p : tp.entries) {
                io::write_u32(os, p.doc);
                io::write_u32(os, p.tf_title);
                io::write_u32(os, p.tf_abstract);
            }
        }
        if (!os) fail("short write: " + path);
    }

    static InvertedIndex load(const std::string& path) {
        std::ifstream is(path, std::ios::binary);
        if (!is) fail("cannot open index file: " + path);
        char magic[8];
        is.read(magic, 8);
        if (!is || std::string_view(magic, 8) != std::string_view(kMagic, 8))
            fail("not an index file: " + path);
        uint32_t version = io::read_u32(is);
        if (version != kVersion)
            fail("unsupported index version " + std::to_string(version) + " in " + path);

        InvertedIndex idx;
        DictionaryConfig cfg;
        cfg.max_terms = io::read_u64(is);
        cfg.max_doc_freq_ratio = io::read_f64(is);
        cfg.min_count = io::read_u64(is);
        uint64_t n_terms = io::read_u64(is);
        std::vector<std::string> terms(n_terms);
        for (auto& t : terms) t = io::read_string(is);
        idx.dict_ = Dictionary(std::move(terms), cfg);

        uint64_t n_docs = io::read_u64(is);
        idx.doc_ids_.resize(n_docs);
        idx.len_title_.resize(n_docs);
        idx.len_abstract_.resize(n_docs);
        for (uint64_t i = 0; i < n_docs; ++i) {
            idx.doc_ids_[i] = io::read_string(is);
            idx.len_title_[i] = io::read_u32(is);
            idx.len_abstract_[i] = io::read_u32(is);
            idx.id_to_idx_.emplace(idx.doc_ids_[i], static_cast<uint32_t>(i));
        }
        uint64_t n_posted = io::read_u64(is);
        for (uint64_t t = 0; t < n_posted; ++t) {
            std::string term = io::read_string(is);
            TermPostings tp;
            uint64_t n_entries = io::read_u64(is);
            tp.entries.resize(n_entries);
            for (auto& p : tp.entries) {
                p.doc = io::read_u32(is);
                p.tf_title = io::read_u32(is);
                p.tf_abstract = io::read_u32(is);
            }
            finalize_postings(tp);
            idx.postings_.emplace(std::move(term), std::move(tp));
        }
        idx.compute_averages();
        return idx;
    }

  private:
    friend class IndexBuilder;
    static constexpr const char kMagic[9] = "TARKIDX\0";
    static constexpr uint32_t kVersion = 1;

    double saturation(uint32_t tf, uint32_t len, Field f, const Bm25Params& params) const {
        double avg = avg_field_length(f);
        double norm = avg > 0 ? 1.0 - params.b + params.b * (static_cast<double>(len) / avg) : 1.0;
        double tfd = static_cast<double>(tf);
        return tfd * (params.k1 + 1.0) / (tfd + params.k1 * norm);
    }

    uint32_t postings_df(const std::string& term, Field f) const {
        const TermPostings* tp = postings(term);
        return tp ? tp->df(f) : 0;
    }

    static void finalize_postings(TermPostings& tp) {
        std::sort(tp.entries.begin(), tp.entries.end(),
                  [](const Posting& a, const Posting& b) { return a.doc < b.doc; });
        tp.df_title = tp.df_abstract = 0;
        for (const Posting& p : tp.entries) {
            if (p.tf_title > 0) ++tp.df_title;
            if (p.tf_abstract > 0) ++tp.df_abstract;
        }
    }

    void compute_averages() {
        double st = 0, sa = 0;
        for (size_t i = 0; i < doc_ids_.size(); ++i) {
            st += len_title_[i];
            sa += len_abstract_[i];
        }
        double n = doc_ids_.empty() ? 1.0 : static_cast<double>(doc_ids_.size());
        avg_title_ = st / n;
        avg_abstract_ = sa / n;
        avg_both_ = (st + sa) / n;
    }

    std::vector<std::string> doc_ids_;
    std::unordered_map<std::string, uint32_t> id_to_idx_;
    std::vector<uint32_t> len_title_;
    std::vector<uint32_t> len_abstract_;
    double avg_title_ = 0, avg_abstract_ = 0, avg_both_ = 0;
    std::unordered_map<std::string, TermPostings> postings_;
    Dictionary dict_;
};

/// Accumulates documents (possibly from parallel producers) into an
/// InvertedIndex. add() is thread-safe; build() finalizes postings order and
/// statistics. Documents are assigned indices in insertion order.
class IndexBuilder {
  public:
    explicit IndexBuilder(Dictionary dictionary) { index_.dict_ = std::move(dictionary); }

    void add(const Document& doc) {
        auto title_tokens = tokenize(doc.title);
        auto abstract_tokens = tokenize(doc.abstract);

        std::unordered_map<std::string, std::pair<uint32_t, uint32_t>> tfs;
        for (const auto& t : title_tokens)
            if (index_.dict_.contains(t)) ++tfs[t].first;
        for (const auto& t : abstract_tokens)
            if (index_.dict_.contains(t)) ++tfs[t].second;

        std::lock_guard<std::mutex> lock(mutex_);
        auto [it, inserted] =
            index_.id_to_idx_.emplace(doc.doc_id, static_cast<uint32_t>(index_.doc_ids_.size()));
        if (!inserted) fail("duplicate doc_id: " + doc.doc_id);
        uint32_t idx = it->second;
        index_.doc_ids_.push_back(doc.doc_id);
        index_.len_title_.push_back(static_cast<uint32_t>(title_tokens.size()));
        index_.len_abstract_.push_back(static_cast<uint32_t>(abstract_tokens.size()));
        for (const auto& [term, tf] : tfs)
            index_.postings_[term].entries.push_back(Posting{idx, tf.first, tf.second});
    }

    InvertedIndex build() {
        std::lock_guard<std::mutex> lock(mutex_);
        for (auto& [term, tp] : index_.postings_) InvertedIndex::finalize_postings(tp);
        index_.compute_averages();
        return std::move(index_);
    }

  private:
    std::mutex mutex_;
    InvertedIndex index_;
};

inline InvertedIndex build_index(const Corpus& corpus, const Dictionary& dictionary) {
    IndexBuilder builder(dictionary);
    for (const auto& doc : corpus.docs()) builder.add(doc);
    return builder.build();
}

}  // namespace tarkit
