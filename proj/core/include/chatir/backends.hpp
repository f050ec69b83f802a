// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "chatir/attribute_table.hpp"
#include "chatir/dialog.hpp"

namespace chatir {

// Maps a serialized dialog into the image embedding space.
// Implementations must be safe to call from several threads.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dim() const = 0;
  virtual std::vector<float> embed(const SerializedQuery& query) = 0;
};

// Produces the next question from the dialog alone. The signature carries
// no target information on purpose: a questioner cannot peek.
class Questioner {
 public:
  virtual ~Questioner() = default;
  virtual std::string next_question(const Dialog& dialog) = 0;
};

// Answers a question about the target image.
class Answerer {
 public:
  virtual ~Answerer() = default;
  virtual std::string answer(std::string_view question,
                             std::string_view target_id,
                             const Dialog& history) = 0;
};

// Text-in, text-out language model (chat completion).
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

// Rejects empty text, then delegates.
std::vector<float> embed_text(Embedder& embedder, const SerializedQuery& query);

// ---------------------------------------------------------------------------
// Offline stubs

// Hashed bag of whitespace tokens: each token lands in one of `dim` buckets,
// counts accumulate and the vector is L2-normalized.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dim, std::uint64_t seed = 0);

  std::size_t dim() const override { return dim_; }
  std::vector<float> embed(const SerializedQuery& query) override;

  // Embeds arbitrary text (corpus side of the synthetic testbed).
  std::vector<float> embed_raw(std::string_view text) const;
  std::size_t bucket_of(std::string_view token) const;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

// Cycles a fixed list: round i asks questions[i mod size].
class TemplateQuestioner final : public Questioner {
 public:
  explicit TemplateQuestioner(std::vector<std::string> questions);
  std::string next_question(const Dialog& dialog) override;

  std::span<const std::string> questions() const noexcept {
    return questions_;
  }

 private:
  std::vector<std::string> questions_;
};

// "what is its <attribute>?" for each attribute, in order.
std::vector<std::string> attribute_questions(
    std::span<const std::string> attributes);

// Replays stored human questions. Stored dialogs are looked up by caption,
// which keeps the call target-blind.
class RecordedQuestioner final : public Questioner {
 public:
  explicit RecordedQuestioner(Dialog stored);
  explicit RecordedQuestioner(std::vector<Dialog> stored);
  std::string next_question(const Dialog& dialog) override;

 private:
  std::unordered_map<std::string, Dialog> by_caption_;
};

// Replays stored answers keyed by target id.
class RecordedAnswerer final : public Answerer {
 public:
  explicit RecordedAnswerer(std::unordered_map<std::string, Dialog> stored);
  std::string answer(std::string_view question, std::string_view target_id,
                     const Dialog& history) override;

 private:
  std::unordered_map<std::string, Dialog> stored_;
};

inline constexpr std::string_view kUnknownAnswer = "unknown";

// Truthful answers from an attribute table. The asked attribute is the
// first attribute name found among the question's words; questions about
// anything else get "unknown". Unknown targets raise IntegrityError.
class OracleAnswerer final : public Answerer {
 public:
  explicit OracleAnswerer(std::shared_ptr<const AttributeTable> table);
  std::string answer(std::string_view question, std::string_view target_id,
                     const Dialog& history) override;

 private:
  std::shared_ptr<const AttributeTable> table_;
};

// Wraps another embedder and counts calls.
class CountingEmbedder final : public Embedder {
 public:
  explicit CountingEmbedder(std::shared_ptr<Embedder> inner)
      : inner_(std::move(inner)) {}
  std::size_t dim() const override { return inner_->dim(); }
  std::vector<float> embed(const SerializedQuery& query) override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return inner_->embed(query);
  }
  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  std::shared_ptr<Embedder> inner_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace chatir
