// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "chatir/backends.hpp"
#include "chatir/dialog.hpp"
#include "chatir/error.hpp"
#include "chatir/index.hpp"

namespace chatir {

// Maps onto an HTTP status and a machine-readable code.
class ServiceError : public Error {
 public:
  ServiceError(int status, std::string code, const std::string& message)
      : Error(message), status_(status), code_(std::move(code)) {}
  int status() const noexcept { return status_; }
  const std::string& code() const noexcept { return code_; }

 private:
  int status_;
  std::string code_;
};

struct TopkEntry {
  std::string id;
  double score = 0.0;
  std::optional<std::string> thumbnail_url;
};

struct TopkSnapshot {
  std::size_t round = 0;
  std::vector<TopkEntry> topk;
};

using TimePoint = std::chrono::system_clock::time_point;

// Reply to session creation and to each answer.
struct TurnResponse {
  std::string session_id;
  std::size_t round = 0;
  std::vector<TopkEntry> topk;
  std::optional<std::string> question;  // none once max rounds is reached
  std::optional<std::size_t> target_rank;
};

struct SessionView {
  std::string session_id;
  std::string corpus;
  std::size_t k = 0;
  Dialog dialog;
  std::size_t round = 0;
  std::optional<std::string> pending_question;
  std::vector<TopkSnapshot> snapshots;  // one per completed round, 0..round
  std::optional<std::string> target_id;
  std::vector<std::size_t> rank_trace;  // empty unless instrumented
  TimePoint created_at;
  TimePoint last_active;
};

struct CorpusInfo {
  std::string name;
  std::size_t size = 0;
  std::size_t dim = 0;
};

struct ServiceOptions {
  std::chrono::seconds ttl{30 * 60};
  std::size_t max_rounds = kDefaultMaxRounds;
  std::function<TimePoint()> clock = [] { return std::chrono::system_clock::now(); };
};

// In-memory session store driving the interactive loop: embed the dialog,
// rank the corpus, ask the next question. Sessions are independent; a
// session accepts one mutation at a time and rejects concurrent ones.
class SessionManager {
 public:
  SessionManager(std::shared_ptr<Embedder> embedder,
                 std::shared_ptr<Questioner> questioner,
                 ServiceOptions options = {});

  // Not thread-safe against concurrent requests; register corpora first.
  void add_corpus(std::string name, std::shared_ptr<const EmbeddingCorpus> corpus,
                  std::unordered_map<std::string, std::string> thumbnails = {});
  std::vector<CorpusInfo> corpora() const;

  // Errors: 404 unknown corpus or target, 400 empty caption / bad k,
  // 503 questioner or embedder failure.
  TurnResponse create_session(std::string_view corpus, std::string caption,
                              std::size_t k,
                              std::optional<std::string> target_id = std::nullopt);

  // Errors: 404 unknown, 410 expired, 409 no pending question or a
  // concurrent submit in progress, 422 empty answer, 503 backend failure.
  TurnResponse submit_answer(std::string_view session_id, std::string answer);

  SessionView get_session(std::string_view session_id);

  // Drops sessions idle for longer than the TTL; returns how many.
  std::size_t purge_expired();
  std::size_t active_sessions() const;

  std::size_t search_calls() const noexcept { return searches_.load(); }
  const ServiceOptions& options() const noexcept { return options_; }

 private:
  struct CorpusEntry;
  struct Session;

  std::shared_ptr<Session> lookup(std::string_view id);
  std::vector<TopkEntry> rank(const CorpusEntry& corpus, const Dialog& dialog,
                              std::size_t k, std::optional<std::size_t> target_row,
                              std::optional<std::size_t>& target_rank);
  std::string ask(const Dialog& dialog);
  std::string new_session_id();

  std::shared_ptr<Embedder> embedder_;
  std::shared_ptr<Questioner> questioner_;
  ServiceOptions options_;
  std::unordered_map<std::string, std::shared_ptr<CorpusEntry>> corpora_;

  mutable std::shared_mutex store_mutex_;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
  std::unordered_set<std::string> expired_;

  std::mutex id_mutex_;
  std::uint64_t id_state_[2];
  std::atomic<std::size_t> searches_{0};
};

// JSON encodings used by the HTTP layer (exposed for tests and tools).
std::string to_json(const TurnResponse& response);
std::string to_json(const SessionView& session);

struct ServerConfig {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::chrono::seconds ttl{30 * 60};
  std::size_t max_rounds = kDefaultMaxRounds;
  std::optional<std::filesystem::path> static_dir;
  struct Corpus {
    std::string name;
    std::filesystem::path embeddings;
    std::filesystem::path ids;
    std::optional<std::filesystem::path> thumbnails;
  };
  std::vector<Corpus> corpora;
  std::string backends_json = "{}";  // see make_backends
};

// Parses the server configuration file; CHATIR_HOST, CHATIR_PORT and
// CHATIR_TTL_SECONDS override the file. Relative paths resolve against
// `base_dir`. Throws ParseError.
ServerConfig parse_server_config(std::string_view json_text,
                                 const std::filesystem::path& base_dir = {});

// HTTP front end:
//   POST /v1/corpora/{name}/sessions   {caption, k?, target_id?}
//   POST /v1/sessions/{id}/answers     {answer}
//   GET  /v1/sessions/{id}
//   GET  /v1/healthz
//   GET  /v1/corpora
// Errors are returned as {"error": {"code", "message"}}.
class HttpService {
 public:
  explicit HttpService(std::shared_ptr<SessionManager> manager,
                       std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // Blocks until stop(). Returns false if the socket could not be bound.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it (or -1); serve with run().
  int bind_any_port(const std::string& host);
  bool run();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace chatir
