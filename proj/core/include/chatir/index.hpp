// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace chatir {

struct RankedItem {
  std::string id;
  std::size_t row = 0;
  double score = 0.0;  // cosine similarity in [-1, 1]

  bool operator==(const RankedItem&) const = default;
};

// Scores are non-increasing; equal scores are ordered by corpus row.
struct Ranking {
  std::vector<RankedItem> entries;
  std::size_t k = 0;
};

// Immutable matrix of L2-normalized image embeddings with stable ids.
// All query methods are const and safe to call concurrently.
class EmbeddingCorpus {
 public:
  // Normalizes each row. Throws std::invalid_argument on an empty corpus,
  // a size mismatch, duplicate ids, zero-norm or non-finite rows.
  EmbeddingCorpus(std::vector<std::string> ids, std::vector<float> raw_vectors,
                  std::size_t dim);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }

  const std::string& id(std::size_t row) const { return ids_.at(row); }
  std::span<const std::string> ids() const noexcept { return ids_; }
  std::span<const float> row(std::size_t row) const;
  std::span<const float> data() const noexcept { return vectors_; }
  std::optional<std::size_t> find(std::string_view id) const;

  // Cosine score of every row against `query` (normalized internally).
  std::vector<double> scores(std::span<const float> query) const;

  // Exact top-k. Requires 1 <= k <= size() and a non-zero query of the
  // corpus dimension.
  Ranking search(std::span<const float> query, std::size_t k) const;

  // 1-based rank of `target_id`: one plus the number of rows that score
  // strictly higher, or equal with a lower row index.
  std::size_t rank_of(std::span<const float> query,
                      std::string_view target_id) const;
  std::size_t rank_of_row(std::span<const float> query,
                          std::size_t target_row) const;

  // Top-k plus the rank of `target_row`, from a single scoring pass.
  std::pair<Ranking, std::size_t> search_and_rank(std::span<const float> query,
                                                  std::size_t k,
                                                  std::size_t target_row) const;

  std::size_t memory_bytes() const noexcept;

 private:
  std::vector<double> normalized_query(std::span<const float> query) const;
  double dot(std::size_t row, std::span<const double> query) const;
  Ranking top_k(std::span<const double> scores, std::size_t k) const;

  std::vector<std::string> ids_;
  std::vector<float> vectors_;
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::size_t> row_of_;
};

inline EmbeddingCorpus build_corpus(std::vector<std::string> ids,
                                    std::vector<float> raw_vectors,
                                    std::size_t dim) {
  return EmbeddingCorpus(std::move(ids), std::move(raw_vectors), dim);
}

}  // namespace chatir
