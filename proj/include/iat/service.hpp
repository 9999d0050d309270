#pragma once

// HTTP endpoints backing the browser test runner.
//
//   GET  /api/config               stimulus items and block layout
//   POST /api/sessions             store + score a canonical session (201)
//   GET  /api/sessions             listing
//   GET  /api/sessions/{id}        stored session
//   GET  /api/sessions/{id}/score  ScoreResult
//   GET  /api/strategy?score=d     random strategy with directed instructions

#include <iat/errors.hpp>
#include <iat/scoring.hpp>
#include <iat/session.hpp>
#include <iat/session_io.hpp>
#include <iat/store.hpp>
#include <iat/strategies.hpp>

#include <httplib.h>
#include <json.hpp>

#include <cstdint>
#include <mutex>
#include <random>
#include <string>

namespace iat {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::uint64_t seed = 0;
};

inline ojson config_payload() {
  ojson cats = ojson::array();
  for (auto c : kAllCategories) {
    ojson items = ojson::array();
    for (const auto& it : stimulus_items())
      if (it.category == c) items.push_back(it.text);
    cats.push_back({{"name", to_string(c)},
                    {"kind", kind_of(c) == CategoryKind::Concept ? "concept" : "attribute"},
                    {"items", items}});
  }
  ojson blocks = ojson::array();
  for (const auto& b : standard_block_layout()) {
    ojson left = ojson::array(), right = ojson::array();
    for (auto c : b.left) left.push_back(to_string(c));
    for (auto c : b.right) right.push_back(to_string(c));
    blocks.push_back({{"index", b.index},
                      {"role", to_string(b.role)},
                      {"left", left},
                      {"right", right},
                      {"trial_count", b.trial_count}});
  }
  return {{"categories", cats},
          {"blocks", blocks},
          {"keys", {{"left", "E"}, {"right", "I"}}}};
}

class IatService {
 public:
  IatService(SessionStore& store, std::uint64_t seed) : store_(store), rng_(seed) {}

  /// Registers every route on `srv`.
  void install(httplib::Server& srv) {
    srv.Get("/api/config", [](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, config_payload());
    });

    srv.Post("/api/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      post_session(req, res);
    });

    srv.Get("/api/sessions", [this](const httplib::Request&, httplib::Response& res) {
      ojson out = ojson::array();
      for (const auto& r : store_.list())
        out.push_back({{"session_id", r.session.session_id},
                       {"participant_id", r.session.participant_id},
                       {"attempt", r.session.attempt},
                       {"strategy_id", r.session.strategy_id},
                       {"received_at", r.received_at},
                       {"source", to_string(r.source)}});
      reply(res, 200, out);
    });

    srv.Get(R"(/api/sessions/([^/]+)/score)",
            [this](const httplib::Request& req, httplib::Response& res) {
              auto rec = store_.find(req.matches[1]);
              if (!rec) return reply(res, 404, {{"error", "unknown session id"}});
              try {
                reply(res, 200, score_to_json(rec->session.session_id,
                                              d_score(rec->session)));
              } catch (const UnscorableError& e) {
                reply(res, 422, {{"error", e.what()}});
              }
            });

    srv.Get(R"(/api/sessions/([^/]+))",
            [this](const httplib::Request& req, httplib::Response& res) {
              auto rec = store_.find(req.matches[1]);
              if (!rec) return reply(res, 404, {{"error", "unknown session id"}});
              reply(res, 200, session_to_json(rec->session));
            });

    srv.Get("/api/strategy", [this](const httplib::Request& req, httplib::Response& res) {
      if (!req.has_param("score"))
        return reply(res, 400, {{"error", "missing score parameter"}});
      double score = 0.0;
      try {
        std::size_t used = 0;
        const auto text = req.get_param_value("score");
        score = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        return reply(res, 400, {{"error", "score must be a number"}});
      }
      int sid = 0;
      {
        std::lock_guard lock(rng_mu_);
        sid = std::uniform_int_distribution<int>(1, 5)(rng_);
      }
      const auto s = strategy_instruction(sid, score);
      reply(res, 200,
            {{"strategy_id", s.strategy_id},
             {"title", s.title},
             {"instruction", s.instruction},
             {"target_pairing", s.target_pairing},
             {"target_blocks", s.target_blocks}});
    });
  }

 private:
  static void reply(httplib::Response& res, int status, const ojson& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  void post_session(const httplib::Request& req, httplib::Response& res) {
    ojson body;
    try {
      body = ojson::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
      return reply(res, 400, {{"error", std::string("malformed JSON: ") + e.what()}});
    }
    Session s;
    try {
      s = session_from_json(body);
    } catch (const ValidationError& e) {
      return reply(res, 422, {{"error", "invalid session"}, {"violations", e.violations()}});
    } catch (const ParseError& e) {
      return reply(res, 422, {{"error", e.what()}, {"violations", {e.what()}}});
    }
    ScoreResult score;
    try {
      score = d_score(s);
    } catch (const UnscorableError& e) {
      return reply(res, 422, {{"error", "unscorable session"}, {"violations", {e.what()}}});
    }
    auto source = RecordSource::Ui;
    if (req.has_param("source")) {
      auto src = source_from_string(req.get_param_value("source"));
      if (!src) return reply(res, 400, {{"error", "unknown source"}});
      source = *src;
    }
    if (!store_.append(s, source))
      return reply(res, 409, {{"error", "duplicate session_id"}, {"session_id", s.session_id}});
    reply(res, 201,
          {{"session_id", s.session_id},
           {"d_score", score.d_score},
           {"association", to_string(association_label(score))}});
  }

  SessionStore& store_;
  std::mutex rng_mu_;
  std::mt19937_64 rng_;
};

/// Blocks serving until the server is stopped.
inline bool serve(SessionStore& store, const ServiceConfig& cfg) {
  httplib::Server srv;
  IatService svc(store, cfg.seed);
  svc.install(srv);
  return srv.listen(cfg.host, cfg.port);
}

}  // namespace iat
