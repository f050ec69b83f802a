// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstdio>
#include <random>

#include "chatir/rng.hpp"
#include "chatir/service.hpp"

namespace chatir {

struct SessionManager::CorpusEntry {
  std::string name;
  std::shared_ptr<const EmbeddingCorpus> corpus;
  std::unordered_map<std::string, std::string> thumbnails;
};

struct SessionManager::Session {
  Session(std::string id_, std::shared_ptr<const CorpusEntry> corpus_,
          std::size_t k_, Dialog dialog_)
      : id(std::move(id_)), corpus(std::move(corpus_)), k(k_),
        dialog(std::move(dialog_)) {}

  // Held for the whole of a mutation; contenders are turned away.
  std::mutex mutex;
  std::string id;
  std::shared_ptr<const CorpusEntry> corpus;
  std::size_t k;
  Dialog dialog;
  std::optional<std::string> pending_question;
  std::vector<TopkSnapshot> snapshots;
  std::optional<std::string> target_id;
  std::optional<std::size_t> target_row;
  std::vector<std::size_t> rank_trace;
  TimePoint created_at;
  TimePoint last_active;
};

namespace {

ServiceError not_found(const std::string& what) {
  return ServiceError(404, "not_found", what);
}

}  // namespace

SessionManager::SessionManager(std::shared_ptr<Embedder> embedder,
                               std::shared_ptr<Questioner> questioner,
                               ServiceOptions options)
    : embedder_(std::move(embedder)),
      questioner_(std::move(questioner)),
      options_(std::move(options)) {
  if (!embedder_ || !questioner_) {
    throw std::invalid_argument("session manager needs an embedder and a questioner");
  }
  if (options_.max_rounds == 0) throw std::invalid_argument("max_rounds must be > 0");
  std::random_device rd;
  id_state_[0] = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  id_state_[1] = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void SessionManager::add_corpus(
    std::string name, std::shared_ptr<const EmbeddingCorpus> corpus,
    std::unordered_map<std::string, std::string> thumbnails) {
  if (!corpus) throw std::invalid_argument("null corpus");
  if (corpus->dim() != embedder_->dim()) {
    throw std::invalid_argument("corpus '" + name + "' has dimension " +
                                std::to_string(corpus->dim()) +
                                " but the embedder produces " +
                                std::to_string(embedder_->dim()));
  }
  auto entry = std::make_shared<CorpusEntry>(
      CorpusEntry{name, std::move(corpus), std::move(thumbnails)});
  corpora_.insert_or_assign(std::move(name), std::move(entry));
}

std::vector<CorpusInfo> SessionManager::corpora() const {
  std::vector<CorpusInfo> out;
  for (const auto& [name, entry] : corpora_) {
    out.push_back({name, entry->corpus->size(), entry->corpus->dim()});
  }
  std::sort(out.begin(), out.end(),
            [](const CorpusInfo& a, const CorpusInfo& b) { return a.name < b.name; });
  return out;
}

std::string SessionManager::new_session_id() {
  std::lock_guard lock(id_mutex_);
  char buf[33];
  std::uint64_t parts[2];
  for (int i = 0; i < 2; ++i) {
    id_state_[i] = mix_seed(id_state_[i], 0x5e5510 + static_cast<std::uint64_t>(i));
    parts[i] = id_state_[i];
  }
  std::snprintf(buf, sizeof buf, "%016llx%016llx",
                static_cast<unsigned long long>(parts[0]),
                static_cast<unsigned long long>(parts[1]));
  return buf;
}

std::vector<TopkEntry> SessionManager::rank(
    const CorpusEntry& corpus, const Dialog& dialog, std::size_t k,
    std::optional<std::size_t> target_row,
    std::optional<std::size_t>& target_rank) {
  std::vector<float> query;
  try {
    query = embed_text(*embedder_, serialize_dialog(dialog, dialog.size()));
  } catch (const std::exception& e) {
    throw ServiceError(503, "unavailable", std::string("embedder failed: ") + e.what());
  }
  searches_.fetch_add(1, std::memory_order_relaxed);
  Ranking ranking;
  if (target_row) {
    auto [r, rank] = corpus.corpus->search_and_rank(query, k, *target_row);
    ranking = std::move(r);
    target_rank = rank;
  } else {
    ranking = corpus.corpus->search(query, k);
  }
  std::vector<TopkEntry> out;
  out.reserve(ranking.entries.size());
  for (auto& e : ranking.entries) {
    TopkEntry entry{std::move(e.id), e.score, std::nullopt};
    if (const auto it = corpus.thumbnails.find(entry.id); it != corpus.thumbnails.end()) {
      entry.thumbnail_url = it->second;
    }
    out.push_back(std::move(entry));
  }
  return out;
}

std::string SessionManager::ask(const Dialog& dialog) {
  std::string question;
  try {
    question = questioner_->next_question(dialog);
  } catch (const std::exception& e) {
    throw ServiceError(503, "unavailable", std::string("questioner failed: ") + e.what());
  }
  if (trim(question).empty()) {
    throw ServiceError(503, "unavailable", "questioner returned an empty question");
  }
  return question;
}

TurnResponse SessionManager::create_session(std::string_view corpus_name,
                                            std::string caption, std::size_t k,
                                            std::optional<std::string> target_id) {
  const auto it = corpora_.find(std::string(corpus_name));
  if (it == corpora_.end()) {
    throw not_found("unknown corpus '" + std::string(corpus_name) + "'");
  }
  const auto corpus = it->second;
  if (trim(caption).empty()) {
    throw ServiceError(400, "bad_request", "caption must not be empty");
  }
  if (k < 1 || k > corpus->corpus->size()) {
    throw ServiceError(400, "bad_request",
                       "k must lie in [1, " + std::to_string(corpus->corpus->size()) + "]");
  }
  std::optional<std::size_t> target_row;
  if (target_id) {
    target_row = corpus->corpus->find(*target_id);
    if (!target_row) throw not_found("unknown target id '" + *target_id + "'");
  }

  Dialog dialog(std::move(caption), {}, options_.max_rounds);
  std::optional<std::size_t> target_rank;
  auto topk = rank(*corpus, dialog, k, target_row, target_rank);
  std::string question = ask(dialog);

  auto session = std::make_shared<Session>(new_session_id(), corpus, k, std::move(dialog));
  session->pending_question = question;
  session->snapshots.push_back({0, topk});
  session->target_id = std::move(target_id);
  session->target_row = target_row;
  if (target_rank) session->rank_trace.push_back(*target_rank);
  session->created_at = session->last_active = options_.clock();

  TurnResponse response{session->id, 0, std::move(topk), std::move(question), target_rank};
  {
    std::unique_lock lock(store_mutex_);
    sessions_.emplace(session->id, std::move(session));
  }
  return response;
}

std::shared_ptr<SessionManager::Session> SessionManager::lookup(std::string_view id) {
  std::shared_lock lock(store_mutex_);
  const auto it = sessions_.find(std::string(id));
  if (it != sessions_.end()) return it->second;
  if (expired_.contains(std::string(id))) {
    throw ServiceError(410, "gone", "session '" + std::string(id) + "' has expired");
  }
  throw not_found("unknown session '" + std::string(id) + "'");
}

TurnResponse SessionManager::submit_answer(std::string_view session_id,
                                           std::string answer) {
  auto session = lookup(session_id);
  std::unique_lock guard(session->mutex, std::try_to_lock);
  if (!guard.owns_lock()) {
    throw ServiceError(409, "conflict", "another answer for this session is in flight");
  }
  if (options_.clock() - session->last_active > options_.ttl) {
    guard.unlock();
    purge_expired();
    throw ServiceError(410, "gone", "session '" + session->id + "' has expired");
  }
  if (!session->pending_question) {
    throw ServiceError(409, "conflict", "session has no pending question");
  }
  if (trim(answer).empty()) {
    throw ServiceError(422, "unprocessable", "answer must not be empty");
  }

  Dialog next = session->dialog;
  next.append({*session->pending_question, std::move(answer)});
  std::optional<std::size_t> target_rank;
  auto topk = rank(*session->corpus, next, session->k, session->target_row, target_rank);
  std::optional<std::string> question;
  if (!next.full()) question = ask(next);

  session->dialog = std::move(next);
  session->pending_question = question;
  const std::size_t round = session->dialog.size();
  session->snapshots.push_back({round, topk});
  if (target_rank) session->rank_trace.push_back(*target_rank);
  session->last_active = options_.clock();
  return {session->id, round, std::move(topk), std::move(question), target_rank};
}

SessionView SessionManager::get_session(std::string_view session_id) {
  auto session = lookup(session_id);
  std::unique_lock guard(session->mutex);
  if (options_.clock() - session->last_active > options_.ttl) {
    guard.unlock();
    purge_expired();
    throw ServiceError(410, "gone", "session '" + session->id + "' has expired");
  }
  return SessionView{session->id,
                     session->corpus->name,
                     session->k,
                     session->dialog,
                     session->dialog.size(),
                     session->pending_question,
                     session->snapshots,
                     session->target_id,
                     session->rank_trace,
                     session->created_at,
                     session->last_active};
}

std::size_t SessionManager::purge_expired() {
  const auto now = options_.clock();
  std::unique_lock lock(store_mutex_);
  std::size_t purged = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    std::unique_lock guard(it->second->mutex, std::try_to_lock);
    if (guard.owns_lock() && now - it->second->last_active > options_.ttl) {
      expired_.insert(it->first);
      guard.unlock();
      it = sessions_.erase(it);
      ++purged;
    } else {
      ++it;
    }
  }
  return purged;
}

std::size_t SessionManager::active_sessions() const {
  std::shared_lock lock(store_mutex_);
  return sessions_.size();
}

}  // namespace chatir
