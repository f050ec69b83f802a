// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <stdexcept>

#include "chatir/trainer.hpp"

namespace chatir {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_finite(const Matrix& m, const char* what) {
  for (const double v : m.data()) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + " contains non-finite values");
    }
  }
}

void check_shapes(const Matrix& queries, const Matrix& targets) {
  if (queries.rows() != targets.rows() || queries.cols() != targets.cols()) {
    throw std::invalid_argument("query and target batches differ in shape");
  }
  if (queries.rows() < 2) {
    throw std::invalid_argument("surrogate loss needs a batch of at least 2");
  }
}

Matrix similarity(const Matrix& queries, const Matrix& targets) {
  const std::size_t b = queries.rows();
  Matrix s(b, b);
  for (std::size_t i = 0; i < b; ++i) {
    const auto q = queries.row(i);
    for (std::size_t j = 0; j < b; ++j) {
      const auto t = targets.row(j);
      double acc = 0.0;
      for (std::size_t c = 0; c < q.size(); ++c) acc += q[c] * t[c];
      s(i, j) = acc;
    }
  }
  return s;
}

}  // namespace

SurrogateLoss recall_surrogate_loss(const Matrix& queries,
                                    const Matrix& targets, std::size_t k,
                                    double tau_rank, double tau_recall) {
  check_shapes(queries, targets);
  if (k < 1) throw std::invalid_argument("K must be >= 1");
  if (!(tau_rank > 0.0) || !(tau_recall > 0.0)) {
    throw std::invalid_argument("temperatures must be positive");
  }
  check_finite(queries, "queries");
  check_finite(targets, "targets");

  const std::size_t b = queries.rows();
  const std::size_t d = queries.cols();
  const Matrix s = similarity(queries, targets);

  SurrogateLoss out;
  out.grad = Matrix(b, d);
  out.smooth_ranks.resize(b);
  out.smooth_recall.resize(b);

  // sigma'(u_bj) per pair, reused for the gradient.
  std::vector<double> slope(b);
  double recall_sum = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    double rank = 1.0;
    for (std::size_t j = 0; j < b; ++j) {
      if (j == i) {
        slope[j] = 0.0;
        continue;
      }
      const double sig = sigmoid((s(i, j) - s(i, i)) / tau_rank);
      rank += sig;
      slope[j] = sig * (1.0 - sig);
    }
    const double recall =
        sigmoid((static_cast<double>(k) + kRecallRankMargin - rank) / tau_recall);
    out.smooth_ranks[i] = rank;
    out.smooth_recall[i] = recall;
    recall_sum += recall;

    // dL/dr_i = R_i (1 - R_i) / (B tau_recall)
    // dr_i/dq_i = sum_{j != i} sigma'(u_ij) / tau_rank * (t_j - t_i)
    const double dl_dr =
        recall * (1.0 - recall) / (static_cast<double>(b) * tau_recall);
    auto g = out.grad.row(i);
    const auto ti = targets.row(i);
    for (std::size_t j = 0; j < b; ++j) {
      if (j == i || slope[j] == 0.0) continue;
      const double w = dl_dr * slope[j] / tau_rank;
      const auto tj = targets.row(j);
      for (std::size_t c = 0; c < d; ++c) g[c] += w * (tj[c] - ti[c]);
    }
  }
  out.loss = 1.0 - recall_sum / static_cast<double>(b);
  return out;
}

double hard_recall_at_k(const Matrix& queries, const Matrix& targets,
                        std::size_t k) {
  check_shapes(queries, targets);
  const std::size_t b = queries.rows();
  const Matrix s = similarity(queries, targets);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < b; ++i) {
    std::size_t rank = 1;
    for (std::size_t j = 0; j < b; ++j) {
      if (j != i && s(i, j) > s(i, i)) ++rank;
    }
    if (rank <= k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(b);
}

}  // namespace chatir
