// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chatir/index.hpp"

namespace chatir {

// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Smooth Recall@K

// Half-rank offset inside the recall sigmoid. Places the decision boundary
// between rank K (hit) and rank K+1 (miss), so the zero-temperature limit is
// the hard Recall@K indicator.
inline constexpr double kRecallRankMargin = 0.5;

struct SurrogateLoss {
  double loss = 0.0;
  Matrix grad;                       // d loss / d query, B x d
  std::vector<double> smooth_ranks;  // r_b
  std::vector<double> smooth_recall; // R_b
};

// With s_bj = q_b . t_j:
//   r_b = 1 + sum_{j != b} sigmoid((s_bj - s_bb) / tau_rank)
//   R_b = sigmoid((K + 1/2 - r_b) / tau_recall)
//   loss = 1 - mean_b R_b
// The gradient is taken with respect to the query rows exactly as passed;
// any normalization upstream is the caller's to chain through.
// Throws std::invalid_argument on shape mismatch, B < 2, K < 1,
// non-positive temperatures or non-finite inputs.
SurrogateLoss recall_surrogate_loss(const Matrix& queries,
                                    const Matrix& targets, std::size_t k,
                                    double tau_rank, double tau_recall);

// Fraction of rows whose positive ranks within the top k of the batch. A
// negative outranks the positive only when it scores strictly higher.
double hard_recall_at_k(const Matrix& queries, const Matrix& targets,
                        std::size_t k);

// ---------------------------------------------------------------------------
// Projection head training

struct TrainerConfig {
  double learning_rate = 5e-5;
  double decay = 0.93;  // per epoch
  double lr_floor = 1e-6;
  std::size_t epochs = 36;
  std::size_t batch_size = 512;
  std::size_t k = 10;
  double tau_rank = 0.05;
  double tau_recall = 1.0;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
};

// Throws std::invalid_argument when the configuration is unusable.
void validate(const TrainerConfig& config);

// max(learning_rate * decay^epoch, lr_floor)
double lr_schedule(const TrainerConfig& config, std::size_t epoch);

// Linear map from dialog features (d_in) to image space (d_out).
class ProjectionHead {
 public:
  ProjectionHead(std::size_t d_out, std::size_t d_in);
  ProjectionHead(std::size_t d_out, std::size_t d_in, std::vector<double> weights);

  // Gaussian init with standard deviation 1/sqrt(d_in).
  static ProjectionHead random(std::size_t d_out, std::size_t d_in,
                               std::uint64_t seed);

  std::size_t d_out() const noexcept { return d_out_; }
  std::size_t d_in() const noexcept { return d_in_; }
  std::span<const double> weights() const noexcept { return w_; }
  std::span<double> weights() noexcept { return w_; }

  std::vector<double> project(std::span<const double> features) const;
  Matrix project(const Matrix& features) const;

  bool operator==(const ProjectionHead&) const = default;

 private:
  std::size_t d_out_;
  std::size_t d_in_;
  std::vector<double> w_;  // row-major d_out x d_in
};

// Checkpoint: "CIRW" | u32 version (1) | u32 d_out | u32 d_in |
// d_out*d_in float32, little-endian.
void save_checkpoint(const ProjectionHead& head,
                     const std::filesystem::path& path);
ProjectionHead load_checkpoint(const std::filesystem::path& path);

struct EpochStats {
  std::size_t epoch = 0;
  double lr = 0.0;
  double mean_loss = 0.0;
};

struct TrainResult {
  ProjectionHead head;
  std::vector<EpochStats> history;
};

// AdamW over shuffled mini-batches with in-batch negatives. Targets are the
// frozen corpus embeddings of each example's positive id. Throws
// IntegrityError for unknown ids and NumericError on a non-finite loss.
TrainResult train(const Matrix& features, std::span<const std::string> positives,
                  const EmbeddingCorpus& corpus, const TrainerConfig& config,
                  std::optional<ProjectionHead> init = std::nullopt);

// "epoch,lr,mean_loss" CSV.
std::string format_history_csv(std::span<const EpochStats> history);

// Mean hard in-batch Recall@k over consecutive batches of `batch_size`.
double evaluate_in_batch_recall(const ProjectionHead& head,
                                const Matrix& features,
                                std::span<const std::string> positives,
                                const EmbeddingCorpus& corpus, std::size_t k,
                                std::size_t batch_size);

// Desk-scale pairs: n random unit image embeddings (ids "img<i>") and
// features x_i = M t_i + noise * e_i for a fixed random mixing matrix M.
struct SyntheticPairs {
  EmbeddingCorpus images;
  Matrix features;
  std::vector<std::string> positives;
};
SyntheticPairs make_synthetic_pairs(std::size_t n, std::size_t d_in,
                                    std::size_t d_out, double noise,
                                    std::uint64_t seed);

}  // namespace chatir
