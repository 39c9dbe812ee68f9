#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tarkit/corpus.hpp"
#include "tarkit/error.hpp"
#include "tarkit/feedback.hpp"
#include "tarkit/io.hpp"
#include "tarkit/metrics.hpp"
#include "tarkit/qrels.hpp"
#include "tarkit/run_file.hpp"

namespace tarkit {

/// Everything the screening service serves sessions from. The corpus supplies
/// document text, `runs` the per-topic candidate rankings (one screening
/// session ranks one topic's candidates), and `doc_vectors` the classifier
/// representation. Optional qrels enable oracle recall in stats (demo mode).
struct ServiceContext {
    Corpus corpus;
    std::map<std::string, RankedList> runs;
    DocVectors doc_vectors;
    std::optional<Qrels> qrels;
    FeedbackParams default_params;
    SvmParams svm;
    std::string sessions_dir;  // empty → sessions are in-memory only
};

/// One live screening session; mutations and engine reads are serialized by
/// the session mutex.
struct ServiceSession {
    std::string id;
    std::string topic_id;
    FeedbackParams params;
    std::string idempotency_key;
    std::unique_ptr<ScreeningEngine> engine;
    std::mutex mu;
};

class ScreeningService {
  public:
    explicit ScreeningService(std::shared_ptr<ServiceContext> ctx) : ctx_(std::move(ctx)) {
        if (!ctx_) fail("service context required");
        if (!ctx_->sessions_dir.empty()) {
            std::filesystem::create_directories(ctx_->sessions_dir);
            restore_sessions();
        }
    }

    struct CreateResult {
        std::string session_id;
        bool created = false;  // false when replayed via idempotency key
    };

    CreateResult create_session(const std::string& topic_id, const FeedbackParams& params,
                                const std::string& idempotency_key, uint64_t body_hash) {
        if (!ctx_->runs.count(topic_id)) fail("unknown topic: " + topic_id);
        std::lock_guard<std::mutex> lock(registry_mu_);
        if (!idempotency_key.empty()) {
            auto it = idempotency_.find(idempotency_key);
            if (it != idempotency_.end()) {
                if (it->second.first && *it->second.first != body_hash)
                    fail("idempotency key reused with a different body");
                return {it->second.second, false};
            }
        }
        std::string id = "s" + std::to_string(next_id_++);
        auto session = make_session(id, topic_id, params, idempotency_key);
        sessions_[id] = session;
        if (!idempotency_key.empty()) idempotency_[idempotency_key] = {body_hash, id};
        persist(*session);
        return {id, true};
    }

    std::shared_ptr<ServiceSession> find(const std::string& id) {
        std::lock_guard<std::mutex> lock(registry_mu_);
        auto it = sessions_.find(id);
        return it == sessions_.end() ? nullptr : it->second;
    }

    std::vector<std::string> session_ids() {
        std::lock_guard<std::mutex> lock(registry_mu_);
        std::vector<std::string> out;
        for (const auto& [id, s] : sessions_) out.push_back(id);
        return out;
    }

    const ServiceContext& context() const { return *ctx_; }

    /// Records one judgment (engine + journal); call under the session lock.
    RecordOutcome record(ServiceSession& session, const std::string& doc_id, int label) {
        RecordOutcome outcome = session.engine->record(doc_id, label);
        persist(session);
        return outcome;
    }

  private:
    std::shared_ptr<ServiceSession> make_session(const std::string& id,
                                                 const std::string& topic_id,
                                                 const FeedbackParams& params,
                                                 const std::string& idempotency_key) {
        auto session = std::make_shared<ServiceSession>();
        session->id = id;
        session->topic_id = topic_id;
        session->params = params;
        session->idempotency_key = idempotency_key;
        auto scorer = std::make_shared<SvmPendingScorer>(ctx_->doc_vectors, ctx_->svm);
        session->engine = std::make_unique<ScreeningEngine>(
            topic_id, ctx_->runs.at(topic_id).doc_ids(), std::move(scorer), params);
        return session;
    }

    std::string journal_path(const std::string& id) const {
        return ctx_->sessions_dir + "/" + id + ".json";
    }

    void persist(const ServiceSession& session) {
        if (ctx_->sessions_dir.empty()) return;
        nlohmann::json j;
        j["session_id"] = session.id;
        j["topic_id"] = session.topic_id;
        j["idempotency_key"] = session.idempotency_key;
        j["params"] = {{"k", session.params.k},
                       {"s_init", session.params.s_init},
                       {"t_init", session.params.t_init},
                       {"s_final", session.params.s_final},
                       {"t_final", session.params.t_final}};
        nlohmann::json judgments = nlohmann::json::array();
        for (const auto& judgment : session.engine->judgments())
            judgments.push_back({judgment.doc_id, judgment.label});
        j["judgments"] = std::move(judgments);
        io::atomic_write_file(journal_path(session.id), j.dump() + "\n");
    }

    /// Rebuilds every journaled session by replaying its judgments through a
    /// fresh engine; the engine's determinism restores identical state.
    void restore_sessions() {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(ctx_->sessions_dir))
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            nlohmann::json j;
            {
                std::ifstream is(file);
                if (!is) fail("cannot open session journal: " + file.string());
                try {
                    is >> j;
                } catch (const nlohmann::json::exception& e) {
                    fail(file.string() + ": invalid session journal: " + e.what());
                }
            }
            FeedbackParams params;
            params.k = j.at("params").at("k").get<size_t>();
            params.s_init = j.at("params").at("s_init").get<size_t>();
            params.t_init = j.at("params").at("t_init").get<size_t>();
            params.s_final = j.at("params").at("s_final").get<size_t>();
            params.t_final = j.at("params").at("t_final").get<size_t>();
            std::string id = j.at("session_id").get<std::string>();
            std::string topic_id = j.at("topic_id").get<std::string>();
            if (!ctx_->runs.count(topic_id))
                fail("session " + id + " references unknown topic " + topic_id);
            auto session =
                make_session(id, topic_id, params, j.value("idempotency_key", std::string()));
            for (const auto& judgment : j.at("judgments"))
                session->engine->record(judgment.at(0).get<std::string>(),
                                        judgment.at(1).get<int>());
            sessions_[id] = session;
            if (!session->idempotency_key.empty()) {
                // Body hash is not journaled; replays after restart return the
                // session for any body under the same key.
                idempotency_[session->idempotency_key] = {std::nullopt, id};
            }
            size_t numeric = 0;
            if (id.size() > 1 && id[0] == 's') numeric = std::stoul(id.substr(1));
            next_id_ = std::max(next_id_, numeric + 1);
        }
    }

    std::shared_ptr<ServiceContext> ctx_;
    std::mutex registry_mu_;
    std::map<std::string, std::shared_ptr<ServiceSession>> sessions_;
    std::map<std::string, std::pair<std::optional<uint64_t>, std::string>> idempotency_;
    size_t next_id_ = 1;
};

namespace detail {

inline void json_reply(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump() + "\n", "application/json");
}

inline void error_reply(httplib::Response& res, int status, const std::string& message) {
    json_reply(res, status, nlohmann::json{{"error", message}});
}

inline bool parse_label(const nlohmann::json& j, int& label) {
    if (j.is_number_integer()) {
        int v = j.get<int>();
        if (v != 0 && v != 1) return false;
        label = v;
        return true;
    }
    if (j.is_string()) {
        const std::string& s = j.get<std::string>();
        if (s == "relevant" || s == "include") {
            label = 1;
            return true;
        }
        if (s == "irrelevant" || s == "exclude") {
            label = 0;
            return true;
        }
    }
    return false;
}

}  // namespace detail

/// Wires the REST routes onto an httplib server. The caller owns listening.
inline void attach_routes(httplib::Server& server, std::shared_ptr<ScreeningService> service) {
    using detail::error_reply;
    using detail::json_reply;

    server.Post("/sessions", [service](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json body;
        try {
            body = nlohmann::json::parse(req.body.empty() ? "{}" : req.body);
        } catch (const nlohmann::json::exception&) {
            return error_reply(res, 422, "invalid JSON body");
        }
        if (!body.count("topic_id") || !body.at("topic_id").is_string())
            return error_reply(res, 422, "topic_id required");
        std::string topic_id = body.at("topic_id").get<std::string>();
        FeedbackParams params = service->context().default_params;
        if (body.count("params")) {
            const auto& p = body.at("params");
            if (!p.is_object()) return error_reply(res, 422, "params must be an object");
            if (p.count("k")) params.k = p.at("k").get<size_t>();
            if (p.count("s_init")) params.s_init = p.at("s_init").get<size_t>();
            if (p.count("t_init")) params.t_init = p.at("t_init").get<size_t>();
            if (p.count("s_final")) params.s_final = p.at("s_final").get<size_t>();
            if (p.count("t_final")) params.t_final = p.at("t_final").get<size_t>();
        }
        try {
            params.validate();
        } catch (const Error& e) {
            return error_reply(res, 422, e.what());
        }
        std::string key = body.value("idempotency_key", std::string());
        uint64_t body_hash = io::fnv1a64(body.dump());
        try {
            auto created = service->create_session(topic_id, params, key, body_hash);
            json_reply(res, created.created ? 201 : 200,
                       {{"session_id", created.session_id},
                        {"topic_id", topic_id},
                        {"phase", "bootstrapping"}});
        } catch (const Error& e) {
            std::string what = e.what();
            if (what.rfind("unknown topic", 0) == 0) return error_reply(res, 404, what);
            if (what.find("idempotency") != std::string::npos)
                return error_reply(res, 409, what);
            return error_reply(res, 422, what);
        }
    });

    server.Get(R"(/sessions/([^/]+)/next)",
               [service](const httplib::Request& req, httplib::Response& res) {
                   auto session = service->find(req.matches[1]);
                   if (!session) return error_reply(res, 404, "unknown session");
                   std::lock_guard<std::mutex> lock(session->mu);
                   if (session->engine->phase() == Phase::finished) {
                       json_reply(res, 410,
                                  {{"error", "session finished"},
                                   {"final_ranking", "/sessions/" + session->id + "/final"}});
                       return;
                   }
                   const std::string& doc_id = session->engine->next_doc();
                   const Document& doc = service->context().corpus.by_id(doc_id);
                   json_reply(res, 200,
                              {{"doc_id", doc.doc_id},
                               {"title", doc.title},
                               {"abstract", doc.abstract},
                               {"position", session->engine->next_position()},
                               {"phase", phase_name(session->engine->phase())}});
               });

    server.Post(R"(/sessions/([^/]+)/judgments)",
                [service](const httplib::Request& req, httplib::Response& res) {
                    auto session = service->find(req.matches[1]);
                    if (!session) return error_reply(res, 404, "unknown session");
                    nlohmann::json body;
                    try {
                        body = nlohmann::json::parse(req.body);
                    } catch (const nlohmann::json::exception&) {
                        return error_reply(res, 422, "invalid JSON body");
                    }
                    if (!body.count("doc_id") || !body.at("doc_id").is_string())
                        return error_reply(res, 422, "doc_id required");
                    int label = 0;
                    if (!body.count("label") || !detail::parse_label(body.at("label"), label))
                        return error_reply(res, 422,
                                           "label must be 0, 1, relevant, or irrelevant");
                    std::string doc_id = body.at("doc_id").get<std::string>();
                    std::lock_guard<std::mutex> lock(session->mu);
                    if (session->engine->phase() == Phase::finished)
                        return error_reply(res, 410, "session finished");
                    if (doc_id != session->engine->next_doc())
                        return error_reply(res, 409,
                                           "out-of-order judgment: expected " +
                                               session->engine->next_doc());
                    RecordOutcome outcome = service->record(*session, doc_id, label);
                    json_reply(res, 200,
                               {{"judged", outcome.judged},
                                {"relevant_found", outcome.relevant_found},
                                {"phase", phase_name(outcome.phase)},
                                {"retrained", outcome.retrained},
                                {"step", outcome.step},
                                {"step_changed", outcome.step_changed}});
                });

    server.Get(R"(/sessions/([^/]+)/ranking)",
               [service](const httplib::Request& req, httplib::Response& res) {
                   auto session = service->find(req.matches[1]);
                   if (!session) return error_reply(res, 404, "unknown session");
                   size_t offset = 0, limit = 50;
                   if (req.has_param("offset")) offset = std::stoul(req.get_param_value("offset"));
                   if (req.has_param("limit")) limit = std::stoul(req.get_param_value("limit"));
                   limit = std::min<size_t>(limit, 200);
                   std::lock_guard<std::mutex> lock(session->mu);
                   const auto& pending = session->engine->pending();
                   nlohmann::json items = nlohmann::json::array();
                   for (size_t i = offset; i < pending.size() && i < offset + limit; ++i) {
                       const Document& doc = service->context().corpus.by_id(pending[i]);
                       items.push_back({{"position", i + 1},
                                        {"doc_id", doc.doc_id},
                                        {"title", doc.title}});
                   }
                   json_reply(res, 200,
                              {{"total", pending.size()},
                               {"offset", offset},
                               {"items", std::move(items)}});
               });

    server.Get(R"(/sessions/([^/]+)/stats)",
               [service](const httplib::Request& req, httplib::Response& res) {
                   auto session = service->find(req.matches[1]);
                   if (!session) return error_reply(res, 404, "unknown session");
                   std::lock_guard<std::mutex> lock(session->mu);
                   const auto& engine = *session->engine;
                   nlohmann::json j{{"judged", engine.judged_count()},
                                    {"relevant", engine.relevant_found()},
                                    {"phase", phase_name(engine.phase())},
                                    {"step", engine.step()},
                                    {"candidates", engine.candidate_count()},
                                    {"params",
                                     {{"k", engine.params().k},
                                      {"s_init", engine.params().s_init},
                                      {"t_init", engine.params().t_init},
                                      {"s_final", engine.params().s_final},
                                      {"t_final", engine.params().t_final}}}};
                   const auto& ctx = service->context();
                   if (ctx.qrels && ctx.qrels->has_topic(session->topic_id)) {
                       auto relevant = relevant_set(*ctx.qrels, session->topic_id);
                       if (!relevant.empty()) {
                           size_t found = 0;
                           for (const auto& judgment : engine.judgments())
                               if (relevant.count(judgment.doc_id)) ++found;
                           j["recall_if_oracle"] =
                               static_cast<double>(found) / static_cast<double>(relevant.size());
                       }
                   }
                   json_reply(res, 200, j);
               });

    server.Get(R"(/sessions/([^/]+)/final)",
               [service](const httplib::Request& req, httplib::Response& res) {
                   auto session = service->find(req.matches[1]);
                   if (!session) return error_reply(res, 404, "unknown session");
                   size_t offset = 0, limit = 200;
                   if (req.has_param("offset")) offset = std::stoul(req.get_param_value("offset"));
                   if (req.has_param("limit")) limit = std::stoul(req.get_param_value("limit"));
                   limit = std::min<size_t>(limit, 200);
                   std::lock_guard<std::mutex> lock(session->mu);
                   RankedList ranking = session->engine->final_ranking();
                   nlohmann::json items = nlohmann::json::array();
                   for (size_t i = offset; i < ranking.size() && i < offset + limit; ++i)
                       items.push_back({{"rank", i + 1}, {"doc_id", ranking.entries[i].doc_id}});
                   json_reply(res, 200,
                              {{"topic_id", session->topic_id},
                               {"total", ranking.size()},
                               {"offset", offset},
                               {"finished", session->engine->phase() == Phase::finished},
                               {"items", std::move(items)}});
               });
}

}  // namespace tarkit
