// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include "chatir/index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace chatir {

EmbeddingCorpus::EmbeddingCorpus(std::vector<std::string> ids,
                                 std::vector<float> raw_vectors,
                                 std::size_t dim)
    : ids_(std::move(ids)), vectors_(std::move(raw_vectors)), dim_(dim) {
  if (dim_ == 0) throw std::invalid_argument("corpus dimension must be > 0");
  if (ids_.empty()) throw std::invalid_argument("corpus must not be empty");
  if (vectors_.size() != ids_.size() * dim_) {
    throw std::invalid_argument(
        "corpus dimension mismatch: " + std::to_string(ids_.size()) +
        " ids x " + std::to_string(dim_) + " dims != " +
        std::to_string(vectors_.size()) + " values");
  }
  row_of_.reserve(ids_.size());
  for (std::size_t r = 0; r < ids_.size(); ++r) {
    if (!row_of_.emplace(ids_[r], r).second) {
      throw std::invalid_argument("duplicate corpus id '" + ids_[r] + "'");
    }
    float* values = vectors_.data() + r * dim_;
    double sq = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      sq += static_cast<double>(values[j]) * values[j];
    }
    const double norm = std::sqrt(sq);
    if (!std::isfinite(norm)) {
      throw std::invalid_argument("non-finite vector for id '" + ids_[r] + "'");
    }
    if (norm == 0.0) {
      throw std::invalid_argument("zero-norm vector for id '" + ids_[r] + "'");
    }
    for (std::size_t j = 0; j < dim_; ++j) {
      values[j] = static_cast<float>(values[j] / norm);
    }
  }
}

std::span<const float> EmbeddingCorpus::row(std::size_t r) const {
  if (r >= ids_.size()) throw std::out_of_range("corpus row out of range");
  return {vectors_.data() + r * dim_, dim_};
}

std::optional<std::size_t> EmbeddingCorpus::find(std::string_view id) const {
  const auto it = row_of_.find(std::string(id));
  if (it == row_of_.end()) return std::nullopt;
  return it->second;
}

std::vector<double> EmbeddingCorpus::normalized_query(
    std::span<const float> query) const {
  if (query.size() != dim_) {
    throw std::invalid_argument("query dimension " +
                                std::to_string(query.size()) +
                                " != corpus dimension " +
                                std::to_string(dim_));
  }
  double sq = 0.0;
  for (const float v : query) sq += static_cast<double>(v) * v;
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw std::invalid_argument("non-finite query");
  if (norm == 0.0) throw std::invalid_argument("zero query vector");
  std::vector<double> out(dim_);
  for (std::size_t j = 0; j < dim_; ++j) out[j] = query[j] / norm;
  return out;
}

double EmbeddingCorpus::dot(std::size_t r,
                            std::span<const double> query) const {
  const float* values = vectors_.data() + r * dim_;
  // Four independent accumulators so the compiler can keep the inner loop
  // in vector registers.
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t j = 0;
  for (; j + 4 <= dim_; j += 4) {
    acc[0] += values[j] * query[j];
    acc[1] += values[j + 1] * query[j + 1];
    acc[2] += values[j + 2] * query[j + 2];
    acc[3] += values[j + 3] * query[j + 3];
  }
  for (; j < dim_; ++j) acc[0] += values[j] * query[j];
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

std::vector<double> EmbeddingCorpus::scores(
    std::span<const float> query) const {
  const auto q = normalized_query(query);
  std::vector<double> out(ids_.size());
  for (std::size_t r = 0; r < ids_.size(); ++r) out[r] = dot(r, q);
  return out;
}

Ranking EmbeddingCorpus::top_k(std::span<const double> all,
                               std::size_t k) const {
  if (k < 1 || k > ids_.size()) {
    throw std::invalid_argument("search depth k=" + std::to_string(k) +
                                " outside [1, " + std::to_string(size()) +
                                "]");
  }
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto better = [&all](std::size_t a, std::size_t b) {
    return all[a] > all[b] || (all[a] == all[b] && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(k),
                    order.end(), better);

  Ranking ranking;
  ranking.k = k;
  ranking.entries.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t r = order[i];
    ranking.entries.push_back({ids_[r], r, all[r]});
  }
  return ranking;
}

Ranking EmbeddingCorpus::search(std::span<const float> query,
                                std::size_t k) const {
  if (k < 1 || k > ids_.size()) {
    throw std::invalid_argument("search depth k=" + std::to_string(k) +
                                " outside [1, " + std::to_string(size()) +
                                "]");
  }
  return top_k(scores(query), k);
}

std::pair<Ranking, std::size_t> EmbeddingCorpus::search_and_rank(
    std::span<const float> query, std::size_t k,
    std::size_t target_row) const {
  if (target_row >= ids_.size()) {
    throw std::out_of_range("target row out of range");
  }
  const auto all = scores(query);
  const double target = all[target_row];
  std::size_t rank = 1;
  for (std::size_t r = 0; r < all.size(); ++r) {
    if (all[r] > target || (all[r] == target && r < target_row)) ++rank;
  }
  return {top_k(all, k), rank};
}

std::size_t EmbeddingCorpus::rank_of(std::span<const float> query,
                                     std::string_view target_id) const {
  const auto row = find(target_id);
  if (!row) {
    throw std::out_of_range("unknown target id '" + std::string(target_id) +
                            "'");
  }
  return rank_of_row(query, *row);
}

std::size_t EmbeddingCorpus::rank_of_row(std::span<const float> query,
                                         std::size_t target_row) const {
  if (target_row >= ids_.size()) {
    throw std::out_of_range("target row out of range");
  }
  const auto q = normalized_query(query);
  const double target = dot(target_row, q);
  std::size_t rank = 1;
  for (std::size_t r = 0; r < ids_.size(); ++r) {
    if (r == target_row) continue;
    const double s = dot(r, q);
    if (s > target || (s == target && r < target_row)) ++rank;
  }
  return rank;
}

std::size_t EmbeddingCorpus::memory_bytes() const noexcept {
  std::size_t bytes = vectors_.size() * sizeof(float);
  for (const auto& id : ids_) bytes += id.capacity() + sizeof(std::string);
  return bytes;
}

}  // namespace chatir
