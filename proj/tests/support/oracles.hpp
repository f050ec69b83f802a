// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

// Test-only reference implementations. Nothing here calls the code path it
// is used to check.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chatir/eval.hpp"
#include "chatir/index.hpp"
#include "chatir/rng.hpp"
#include "chatir/trainer.hpp"

namespace chatir::oracle {

// Full sort of every corpus row by (score desc, row asc), with scores from
// a plain sequential double dot product.
inline std::vector<std::size_t> full_sort(const EmbeddingCorpus& corpus,
                                          std::span<const float> query) {
  double sq = 0.0;
  for (const float v : query) sq += static_cast<double>(v) * v;
  const double norm = std::sqrt(sq);
  std::vector<double> scores(corpus.size());
  for (std::size_t r = 0; r < corpus.size(); ++r) {
    const auto row = corpus.row(r);
    double s = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * (query[j] / norm);
    scores[r] = s;
  }
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return order;
}

inline std::vector<float> random_vector(Rng& rng, std::size_t dim) {
  std::vector<float> v(dim);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return v;
}

inline EmbeddingCorpus random_corpus(std::size_t n, std::size_t dim,
                                     std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> ids;
  std::vector<float> values;
  values.reserve(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("id" + std::to_string(i));
    for (std::size_t j = 0; j < dim; ++j) values.push_back(static_cast<float>(rng.normal()));
  }
  return EmbeddingCorpus(std::move(ids), std::move(values), dim);
}

// Closed form of the success-pool curve: fraction of traces whose minimum
// rank over rounds 0..i is within k.
inline std::vector<double> min_rank_hits_curve(std::span<const RankTrace> traces,
                                               std::size_t k, std::size_t rounds) {
  std::vector<double> curve(rounds + 1, 0.0);
  for (std::size_t i = 0; i <= rounds; ++i) {
    std::size_t hits = 0;
    for (const auto& t : traces) {
      std::size_t best = t.ranks[0];
      for (std::size_t r = 0; r <= i && r < t.ranks.size(); ++r) best = std::min(best, t.ranks[r]);
      if (best <= k) ++hits;
    }
    curve[i] = static_cast<double>(hits) / static_cast<double>(traces.size());
  }
  return curve;
}

// Hard in-batch Recall@k: a negative outranks the positive only if it
// scores strictly higher.
inline double hard_recall(const Matrix& q, const Matrix& t, std::size_t k) {
  const std::size_t b = q.rows();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < b; ++i) {
    std::vector<double> s(b);
    for (std::size_t j = 0; j < b; ++j) {
      double acc = 0.0;
      for (std::size_t c = 0; c < q.cols(); ++c) acc += q(i, c) * t(j, c);
      s[j] = acc;
    }
    const auto better = std::count_if(s.begin(), s.end(), [&](double v) { return v > s[i]; });
    if (static_cast<std::size_t>(better) + 1 <= k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(b);
}

inline Matrix random_unit_rows(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double sq = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      m(r, c) = rng.normal();
      sq += m(r, c) * m(r, c);
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) /= std::sqrt(sq);
  }
  return m;
}

// Central differences of the surrogate loss with respect to every query
// entry.
inline Matrix numeric_gradient(const Matrix& q, const Matrix& t, std::size_t k,
                               double tau_rank, double tau_recall, double eps) {
  Matrix grad(q.rows(), q.cols());
  Matrix probe = q;
  for (std::size_t r = 0; r < q.rows(); ++r) {
    for (std::size_t c = 0; c < q.cols(); ++c) {
      const double saved = probe(r, c);
      probe(r, c) = saved + eps;
      const double up = recall_surrogate_loss(probe, t, k, tau_rank, tau_recall).loss;
      probe(r, c) = saved - eps;
      const double down = recall_surrogate_loss(probe, t, k, tau_rank, tau_recall).loss;
      probe(r, c) = saved;
      grad(r, c) = (up - down) / (2.0 * eps);
    }
  }
  return grad;
}

// max_i |a_i - n_i| / max(|a|_inf, |n|_inf)
inline double max_relative_error(const Matrix& analytic, const Matrix& numeric) {
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < analytic.data().size(); ++i) {
    diff = std::max(diff, std::abs(analytic.data()[i] - numeric.data()[i]));
    scale = std::max({scale, std::abs(analytic.data()[i]), std::abs(numeric.data()[i])});
  }
  return scale == 0.0 ? diff : diff / scale;
}

}  // namespace chatir::oracle
