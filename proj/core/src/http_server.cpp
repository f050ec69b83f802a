// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "chatir/service.hpp"

namespace chatir {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

double unix_seconds(TimePoint t) {
  return std::chrono::duration<double>(t.time_since_epoch()).count();
}

ordered_json topk_json(const std::vector<TopkEntry>& topk) {
  auto list = ordered_json::array();
  for (const auto& e : topk) {
    ordered_json item = {{"id", e.id}, {"score", e.score}};
    item["thumbnail_url"] = e.thumbnail_url ? ordered_json(*e.thumbnail_url)
                                            : ordered_json(nullptr);
    list.push_back(std::move(item));
  }
  return list;
}

template <typename T>
ordered_json optional_json(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

void send_json(httplib::Response& res, int status, const std::string& body) {
  res.status = status;
  res.set_content(body, "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
  const ordered_json body = {{"error", {{"code", code}, {"message", message}}}};
  send_json(res, status, body.dump());
}

json parse_request(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    auto j = json::parse(req.body);
    if (!j.is_object()) throw ServiceError(400, "bad_request", "body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ServiceError(400, "bad_request", std::string("malformed JSON: ") + e.what());
  }
}

template <typename Handler>
auto guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const ServiceError& e) {
      send_error(res, e.status(), e.code(), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "bad_request", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

}  // namespace

std::string to_json(const TurnResponse& r) {
  ordered_json j = {{"session_id", r.session_id},
                    {"round", r.round},
                    {"topk", topk_json(r.topk)},
                    {"question", optional_json(r.question)}};
  if (r.target_rank) j["target_rank"] = *r.target_rank;
  return j.dump();
}

std::string to_json(const SessionView& s) {
  auto rounds = ordered_json::array();
  for (const auto& round : s.dialog.rounds()) {
    rounds.push_back({{"q", round.question}, {"a", round.answer}});
  }
  auto snapshots = ordered_json::array();
  for (const auto& snap : s.snapshots) {
    snapshots.push_back({{"round", snap.round}, {"topk", topk_json(snap.topk)}});
  }
  ordered_json j = {{"session_id", s.session_id},
                    {"corpus", s.corpus},
                    {"k", s.k},
                    {"round", s.round},
                    {"dialog", {{"caption", s.dialog.caption()}, {"rounds", rounds}}},
                    {"pending_question", optional_json(s.pending_question)},
                    {"snapshots", std::move(snapshots)},
                    {"created_at", unix_seconds(s.created_at)},
                    {"last_active", unix_seconds(s.last_active)}};
  if (s.target_id) {
    j["target_id"] = *s.target_id;
    j["rank_trace"] = s.rank_trace;
  }
  return j.dump();
}

ServerConfig parse_server_config(std::string_view json_text,
                                 const std::filesystem::path& base_dir) {
  ServerConfig config;
  const auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  try {
    const auto j = json::parse(json_text);
    config.host = j.value("host", config.host);
    config.port = j.value("port", config.port);
    config.ttl = std::chrono::seconds(j.value("ttl_seconds", config.ttl.count()));
    config.max_rounds = j.value("max_rounds", config.max_rounds);
    if (j.contains("static_dir")) config.static_dir = resolve(j.at("static_dir").get<std::string>());
    for (const auto& c : j.value("corpora", json::array())) {
      ServerConfig::Corpus corpus;
      corpus.name = c.at("name").get<std::string>();
      corpus.embeddings = resolve(c.at("embeddings").get<std::string>());
      corpus.ids = resolve(c.at("ids").get<std::string>());
      if (c.contains("thumbnails")) corpus.thumbnails = resolve(c.at("thumbnails").get<std::string>());
      config.corpora.push_back(std::move(corpus));
    }
    if (j.contains("backends")) config.backends_json = j.at("backends").dump();
  } catch (const json::exception& e) {
    throw ParseError(std::string("server config: ") + e.what());
  }
  if (const char* host = std::getenv("CHATIR_HOST"); host && *host) config.host = host;
  if (const char* port = std::getenv("CHATIR_PORT"); port && *port) config.port = std::atoi(port);
  if (const char* ttl = std::getenv("CHATIR_TTL_SECONDS"); ttl && *ttl) {
    config.ttl = std::chrono::seconds(std::atoll(ttl));
  }
  if (config.corpora.empty()) throw ParseError("server config lists no corpora");
  return config;
}

struct HttpService::Impl {
  std::shared_ptr<SessionManager> manager;
  httplib::Server server;
};

HttpService::HttpService(std::shared_ptr<SessionManager> manager,
                         std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>()) {
  impl_->manager = std::move(manager);
  auto& server = impl_->server;
  SessionManager& sessions = *impl_->manager;

  server.Get("/v1/healthz", guarded([&sessions](const auto&, auto& res) {
    const ordered_json body = {{"status", "ok"},
                               {"sessions", sessions.active_sessions()}};
    send_json(res, 200, body.dump());
  }));

  server.Get("/v1/corpora", guarded([&sessions](const auto&, auto& res) {
    auto list = ordered_json::array();
    for (const auto& c : sessions.corpora()) {
      list.push_back({{"name", c.name}, {"size", c.size}, {"dim", c.dim}});
    }
    send_json(res, 200, ordered_json{{"corpora", std::move(list)}}.dump());
  }));

  server.Post(R"(/v1/corpora/([^/]+)/sessions)",
              guarded([&sessions](const httplib::Request& req, auto& res) {
    sessions.purge_expired();
    const auto body = parse_request(req);
    const auto caption = body.value("caption", std::string());
    const auto k = body.value("k", std::size_t{10});
    std::optional<std::string> target;
    if (body.contains("target_id") && !body.at("target_id").is_null()) {
      target = body.at("target_id").get<std::string>();
    }
    const auto reply = sessions.create_session(req.matches[1].str(), caption, k, target);
    send_json(res, 201, to_json(reply));
  }));

  server.Post(R"(/v1/sessions/([^/]+)/answers)",
              guarded([&sessions](const httplib::Request& req, auto& res) {
    const auto body = parse_request(req);
    const auto answer = body.value("answer", std::string());
    send_json(res, 200, to_json(sessions.submit_answer(req.matches[1].str(), answer)));
  }));

  server.Get(R"(/v1/sessions/([^/]+))",
             guarded([&sessions](const httplib::Request& req, auto& res) {
    send_json(res, 200, to_json(sessions.get_session(req.matches[1].str())));
  }));

  if (static_dir) server.set_mount_point("/", static_dir->string());
}

HttpService::~HttpService() { stop(); }

bool HttpService::listen(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

int HttpService::bind_any_port(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool HttpService::run() { return impl_->server.listen_after_bind(); }

void HttpService::stop() {
  if (impl_) impl_->server.stop();
}

void HttpService::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace chatir
