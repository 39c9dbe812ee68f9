#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tarkit/corpus.hpp"
#include "tarkit/embeddings.hpp"
#include "tarkit/error.hpp"
#include "tarkit/linear_svm.hpp"
#include "tarkit/qrels.hpp"
#include "tarkit/run_file.hpp"
#include "tarkit/tfidf.hpp"
#include "tarkit/trace.hpp"

namespace tarkit {

/// Dense per-document vectors (the screening classifier's representation).
class DocVectors {
  public:
    DocVectors() = default;
    explicit DocVectors(size_t dim) : dim_(dim) {}

    size_t dim() const { return dim_; }
    size_t size() const { return index_.size(); }
    bool contains(const std::string& doc_id) const { return index_.count(doc_id) > 0; }

    void add(const std::string& doc_id, std::span<const double> values) {
        if (values.size() != dim_) fail("doc vector dimension mismatch for " + doc_id);
        if (!index_.emplace(doc_id, index_.size()).second)
            fail("duplicate doc vector: " + doc_id);
        data_.insert(data_.end(), values.begin(), values.end());
    }

    std::span<const double> vector(const std::string& doc_id) const {
        auto it = index_.find(doc_id);
        if (it == index_.end()) fail("no vector for doc_id: " + doc_id);
        return {data_.data() + it->second * dim_, dim_};
    }

    std::vector<double> copy_of(const std::string& doc_id) const {
        auto v = vector(doc_id);
        return {v.begin(), v.end()};
    }

  private:
    size_t dim_ = 0;
    std::unordered_map<std::string, size_t> index_;
    std::vector<double> data_;
};

/// Mean word-vector representation of title+abstract for the given documents.
inline DocVectors build_sentence_vectors(const Corpus& corpus, const Embeddings& emb) {
    DocVectors out(emb.dim());
    for (const auto& doc : corpus.docs())
        out.add(doc.doc_id,
                sentence_embedding(tokenize(concat_fields({doc.title, doc.abstract})), emb));
    return out;
}

/// Dense tf-idf representation (the classic-vector-space screening variant).
inline DocVectors build_tfidf_vectors(const Corpus& corpus, const TfIdfVectorizer& vectorizer) {
    DocVectors out(vectorizer.vocabulary_size());
    std::vector<double> dense(vectorizer.vocabulary_size());
    for (const auto& doc : corpus.docs()) {
        std::fill(dense.begin(), dense.end(), 0.0);
        for (auto [col, value] :
             vectorizer.transform_text(concat_fields({doc.title, doc.abstract})))
            dense[col] = value;
        out.add(doc.doc_id, dense);
    }
    return out;
}

/// Scores the unjudged remainder of a session after each retraining round.
class PendingScorer {
  public:
    virtual ~PendingScorer() = default;
    /// Retrains on the judged documents (labels parallel to doc_ids).
    virtual void fit(const std::vector<std::string>& doc_ids, const std::vector<int>& labels) = 0;
    /// Higher score = screened earlier.
    virtual double score(const std::string& doc_id) const = 0;
};

/// The production scorer: a linear SVM over document vectors, warm-started
/// between rounds.
class SvmPendingScorer : public PendingScorer {
  public:
    SvmPendingScorer(const DocVectors& vectors, SvmParams params = {})
        : vectors_(&vectors), params_(params) {}

    void fit(const std::vector<std::string>& doc_ids, const std::vector<int>& labels) override {
        std::vector<std::vector<double>> rows;
        rows.reserve(doc_ids.size());
        for (const auto& id : doc_ids) rows.push_back(vectors_->copy_of(id));
        clf_ = train_linear_svm(rows, labels, params_, &warm_);
        fitted_ = true;
    }

    double score(const std::string& doc_id) const override {
        if (!fitted_) fail("scorer used before first fit");
        return clf_.decision(vectors_->vector(doc_id));
    }

    const LinearClassifier& classifier() const { return clf_; }

  private:
    const DocVectors* vectors_;
    SvmParams params_;
    SvmWarmStart warm_;
    LinearClassifier clf_;
    bool fitted_ = false;
};

/// Constant scorer: every rerank degenerates to doc_id order (the tie-break).
/// Used for schedule tests and as a no-model placeholder.
class ConstantScorer : public PendingScorer {
  public:
    void fit(const std::vector<std::string>&, const std::vector<int>&) override {}
    double score(const std::string&) const override { return 0.0; }
};

/// Scores by true label — the idealized-classifier upper bound.
class OracleScorer : public PendingScorer {
  public:
    OracleScorer(const Qrels& qrels, std::string topic_id)
        : qrels_(&qrels), topic_id_(std::move(topic_id)) {}
    void fit(const std::vector<std::string>&, const std::vector<int>&) override {}
    double score(const std::string& doc_id) const override {
        return qrels_->label(topic_id_, doc_id) > 0 ? 1.0 : 0.0;
    }

  private:
    const Qrels* qrels_;
    std::string topic_id_;
};

struct FeedbackParams {
    size_t k = 10;
    size_t s_init = 1;
    size_t t_init = 200;
    size_t s_final = 50;
    size_t t_final = 1000;  // 0 = unset: screen the whole candidate list

    void validate() const {
        if (k < 1) fail("feedback params: k must be >= 1");
        if (s_init < 1) fail("feedback params: s_init must be >= 1");
        if (s_final < s_init) fail("feedback params: s_final must be >= s_init");
        if (t_init < k) fail("feedback params: t_init must be >= k");
        if (t_final != 0 && t_final < t_init) fail("feedback params: t_final must be >= t_init");
    }
};

enum class Phase { bootstrapping, iterating, finished };

inline const char* phase_name(Phase p) {
    switch (p) {
        case Phase::bootstrapping: return "bootstrapping";
        case Phase::iterating: return "iterating";
        case Phase::finished: return "finished";
    }
    return "?";
}

struct Judgment {
    std::string doc_id;
    int label = 0;
};

struct RecordOutcome {
    size_t judged = 0;
    size_t relevant_found = 0;
    Phase phase = Phase::bootstrapping;
    bool retrained = false;
    size_t step = 0;         // retraining rounds so far
    bool step_changed = false;  // this retrain switched batch size
};

/// The iterative relevance-feedback state machine. Serves one document at a
/// time through next_doc(); record() applies a judgment and advances the
/// bootstrap/retrain schedule. Deterministic given candidates, vectors,
/// scorer, and params — replaying a judgment journal reproduces the state.
class ScreeningEngine {
  public:
    ScreeningEngine(std::string topic_id, std::vector<std::string> candidate_doc_ids,
                    std::shared_ptr<PendingScorer> scorer, FeedbackParams params)
        : topic_id_(std::move(topic_id)),
          pending_(std::move(candidate_doc_ids)),
          scorer_(std::move(scorer)),
          params_(params) {
        params_.validate();
        if (pending_.empty()) fail("screening engine needs a non-empty candidate list");
        if (!scorer_) fail("screening engine needs a scorer");
        std::unordered_set<std::string> seen;
        for (const auto& id : pending_)
            if (!seen.insert(id).second) fail("duplicate candidate doc_id: " + id);
        n_ = pending_.size();
        stop_target_ = std::min(n_, params_.t_final == 0 ? n_ : params_.t_final);
    }

    const std::string& topic_id() const { return topic_id_; }
    Phase phase() const { return phase_; }
    size_t candidate_count() const { return n_; }
    size_t judged_count() const { return judged_.size(); }
    size_t relevant_found() const { return relevant_found_; }
    size_t step() const { return step_; }
    size_t current_batch() const { return phase_ == Phase::iterating ? batch_size_ : 0; }
    bool one_class_outcome() const { return one_class_; }
    const std::vector<Judgment>& judgments() const { return judged_; }
    const FeedbackParams& params() const { return params_; }

    /// The document awaiting judgment. Pure; unchanged until record().
    const std::string& next_doc() const {
        if (phase_ == Phase::finished) fail("screening finished: no next document");
        return pending_.front();
    }

    /// 1-based position of the served document in the current ranking.
    size_t next_position() const { return judged_.size() + 1; }

    RecordOutcome record(const std::string& doc_id, int label) {
        if (phase_ == Phase::finished) fail("screening finished: cannot record");
        if (doc_id != pending_.front())
            fail("out-of-order judgment: expected " + pending_.front() + ", got " + doc_id);

        judged_.push_back({doc_id, label > 0 ? 1 : 0});
        if (label > 0) {
            ++relevant_found_;
            has_relevant_ = true;
        } else {
            has_irrelevant_ = true;
        }
        pending_.erase(pending_.begin());

        RecordOutcome out;
        out.retrained = advance();
        out.judged = judged_.size();
        out.relevant_found = relevant_found_;
        out.phase = phase_;
        out.step = step_;
        out.step_changed = step_changed_;
        return out;
    }

    /// Judged documents in judgment order, then the unjudged remainder in the
    /// last ranking order, with synthetic descending scores.
    RankedList final_ranking() const {
        RankedList out;
        out.topic_id = topic_id_;
        out.entries.reserve(n_);
        double score = static_cast<double>(n_);
        for (const auto& j : judged_) out.entries.push_back({j.doc_id, score--});
        for (const auto& id : pending_) out.entries.push_back({id, score--});
        return out;
    }

    /// Current unjudged remainder in ranking order (for the live service).
    const std::vector<std::string>& pending() const { return pending_; }

  private:
    /// Schedule bookkeeping after one judgment; returns whether a retrain ran.
    bool advance() {
        step_changed_ = false;
        if (phase_ == Phase::bootstrapping) {
            if (pending_.empty()) {
                phase_ = Phase::finished;
                one_class_ = !(has_relevant_ && has_irrelevant_);
                return false;
            }
            if (judged_.size() < params_.k || !(has_relevant_ && has_irrelevant_)) return false;
            phase_ = Phase::iterating;
            return start_batch();
        }
        // iterating
        if (--batch_remaining_ > 0 && !pending_.empty()) return false;
        return start_batch();
    }

    /// Ends the current batch: stop, or retrain + rerank + open a new batch.
    bool start_batch() {
        if (judged_.size() >= stop_target_ || pending_.empty()) {
            phase_ = Phase::finished;
            return false;
        }
        std::vector<std::string> ids(judged_.size());
        std::vector<int> labels(judged_.size());
        for (size_t i = 0; i < judged_.size(); ++i) {
            ids[i] = judged_[i].doc_id;
            labels[i] = judged_[i].label;
        }
        scorer_->fit(ids, labels);
        std::vector<std::pair<double, std::string>> ranked;
        ranked.reserve(pending_.size());
        for (auto& id : pending_) ranked.emplace_back(scorer_->score(id), std::move(id));
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (size_t i = 0; i < ranked.size(); ++i) pending_[i] = std::move(ranked[i].second);

        size_t s = judged_.size() < params_.t_init ? params_.s_init : params_.s_final;
        s = std::min({s, stop_target_ - judged_.size(), pending_.size()});
        step_changed_ = step_ > 0 && s != batch_size_;
        batch_size_ = s;
        batch_remaining_ = s;
        ++step_;
        return true;
    }

    std::string topic_id_;
    std::vector<std::string> pending_;
    std::shared_ptr<PendingScorer> scorer_;
    FeedbackParams params_;
    size_t n_ = 0;
    size_t stop_target_ = 0;
    std::vector<Judgment> judged_;
    size_t relevant_found_ = 0;
    bool has_relevant_ = false;
    bool has_irrelevant_ = false;
    Phase phase_ = Phase::bootstrapping;
    size_t step_ = 0;
    size_t batch_size_ = 0;
    size_t batch_remaining_ = 0;
    bool step_changed_ = false;
    bool one_class_ = false;
};

/// Answers judgments during simulation or live screening.
class Reviewer {
  public:
    virtual ~Reviewer() = default;
    virtual int judge(const std::string& doc_id) = 0;
};

/// Deterministic reviewer that answers from relevance judgments; unjudged
/// documents are irrelevant.
class OracleReviewer : public Reviewer {
  public:
    OracleReviewer(const Qrels& qrels, std::string topic_id)
        : qrels_(&qrels), topic_id_(std::move(topic_id)) {}
    int judge(const std::string& doc_id) override {
        return qrels_->has_topic(topic_id_) ? qrels_->label(topic_id_, doc_id) : 0;
    }

  private:
    const Qrels* qrels_;
    std::string topic_id_;
};

/// Drives the engine to completion with the reviewer, appending one trace row
/// per judgment; returns the final ranking.
inline RankedList simulate_screening(ScreeningEngine& engine, Reviewer& reviewer,
                                     std::vector<TraceRow>* trace = nullptr) {
    while (engine.phase() != Phase::finished) {
        std::string doc = engine.next_doc();
        size_t step = engine.step();
        size_t batch = engine.current_batch();
        int label = reviewer.judge(doc);
        RecordOutcome outcome = engine.record(doc, label);
        if (trace)
            trace->push_back(
                {engine.topic_id(), step, doc, label, outcome.judged, batch});
    }
    return engine.final_ranking();
}

}  // namespace tarkit
