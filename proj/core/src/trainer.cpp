// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include "chatir/trainer.hpp"

#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "chatir/embedding_io.hpp"
#include "chatir/error.hpp"
#include "chatir/rng.hpp"

namespace chatir {

namespace {

constexpr char kCheckpointMagic[4] = {'C', 'I', 'R', 'W'};
constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::size_t> resolve_rows(std::span<const std::string> positives,
                                      const EmbeddingCorpus& corpus) {
  std::vector<std::size_t> rows;
  rows.reserve(positives.size());
  for (const auto& id : positives) {
    const auto row = corpus.find(id);
    if (!row) throw IntegrityError("positive id '" + id + "' not in corpus");
    rows.push_back(*row);
  }
  return rows;
}

Matrix gather_features(const Matrix& features,
                       std::span<const std::size_t> rows) {
  Matrix out(rows.size(), features.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = features.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Matrix gather_targets(const EmbeddingCorpus& corpus,
                      std::span<const std::size_t> rows) {
  Matrix out(rows.size(), corpus.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = corpus.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

// Row-wise L2 normalization; returns the original norms.
std::vector<double> normalize_rows(Matrix& m) {
  std::vector<double> norms(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    double sq = 0.0;
    for (const double v : row) sq += v * v;
    norms[r] = std::sqrt(sq);
    if (norms[r] == 0.0) throw NumericError("projected query has zero norm");
    for (double& v : row) v /= norms[r];
  }
  return norms;
}

}  // namespace

void validate(const TrainerConfig& c) {
  if (!(c.lr_floor >= 0.0) || !(c.learning_rate >= c.lr_floor)) {
    throw std::invalid_argument("need learning_rate >= lr_floor >= 0");
  }
  if (!(c.decay > 0.0 && c.decay < 1.0)) {
    throw std::invalid_argument("decay must lie in (0, 1)");
  }
  if (c.k < 1) throw std::invalid_argument("K must be >= 1");
  if (!(c.tau_rank > 0.0) || !(c.tau_recall > 0.0)) {
    throw std::invalid_argument("temperatures must be positive");
  }
  if (c.batch_size < 2) throw std::invalid_argument("batch_size must be >= 2");
  if (!(c.weight_decay >= 0.0)) {
    throw std::invalid_argument("weight_decay must be >= 0");
  }
}

double lr_schedule(const TrainerConfig& config, std::size_t epoch) {
  const double lr =
      config.learning_rate * std::pow(config.decay, static_cast<double>(epoch));
  return std::max(lr, config.lr_floor);
}

ProjectionHead::ProjectionHead(std::size_t d_out, std::size_t d_in)
    : ProjectionHead(d_out, d_in, std::vector<double>(d_out * d_in, 0.0)) {}

ProjectionHead::ProjectionHead(std::size_t d_out, std::size_t d_in,
                               std::vector<double> weights)
    : d_out_(d_out), d_in_(d_in), w_(std::move(weights)) {
  if (d_out_ == 0 || d_in_ == 0) {
    throw std::invalid_argument("projection head dimensions must be positive");
  }
  if (w_.size() != d_out_ * d_in_) {
    throw std::invalid_argument("projection weights have the wrong size");
  }
  for (const double v : w_) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite weight");
  }
}

ProjectionHead ProjectionHead::random(std::size_t d_out, std::size_t d_in,
                                      std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x68656164ULL));
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_in));
  std::vector<double> w(d_out * d_in);
  for (double& v : w) v = rng.normal() * scale;
  return ProjectionHead(d_out, d_in, std::move(w));
}

std::vector<double> ProjectionHead::project(
    std::span<const double> features) const {
  if (features.size() != d_in_) {
    throw std::invalid_argument("feature dimension mismatch");
  }
  std::vector<double> out(d_out_, 0.0);
  for (std::size_t o = 0; o < d_out_; ++o) {
    const double* w = w_.data() + o * d_in_;
    double acc = 0.0;
    for (std::size_t i = 0; i < d_in_; ++i) acc += w[i] * features[i];
    out[o] = acc;
  }
  return out;
}

Matrix ProjectionHead::project(const Matrix& features) const {
  Matrix out(features.rows(), d_out_);
  for (std::size_t r = 0; r < features.rows(); ++r) {
    const auto p = project(features.row(r));
    std::copy(p.begin(), p.end(), out.row(r).begin());
  }
  return out;
}

void save_checkpoint(const ProjectionHead& head,
                     const std::filesystem::path& path) {
  std::string out;
  out.append(kCheckpointMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(head.d_out()));
  put_u32(out, static_cast<std::uint32_t>(head.d_in()));
  for (const double w : head.weights()) put_f32(out, static_cast<float>(w));
  write_file(path, out);
}

ProjectionHead load_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw ParseError(path.string() + ": bad magic, expected \"CIRW\" checkpoint");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (get_u32(p + 4) != kCheckpointVersion) {
    throw ParseError(path.string() + ": unsupported checkpoint version");
  }
  const std::size_t d_out = get_u32(p + 8);
  const std::size_t d_in = get_u32(p + 12);
  if (bytes.size() != 16 + 4 * d_out * d_in) {
    throw ParseError(path.string() + ": checkpoint payload size mismatch");
  }
  std::vector<double> w(d_out * d_in);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = get_f32(p + 16 + 4 * i);
  return ProjectionHead(d_out, d_in, std::move(w));
}

TrainResult train(const Matrix& features,
                  std::span<const std::string> positives,
                  const EmbeddingCorpus& corpus, const TrainerConfig& config,
                  std::optional<ProjectionHead> init) {
  validate(config);
  if (features.rows() != positives.size()) {
    throw std::invalid_argument("features and positives differ in length");
  }
  if (features.rows() < 2) {
    throw std::invalid_argument("training needs at least two examples");
  }
  const auto target_rows = resolve_rows(positives, corpus);
  const std::size_t d_in = features.cols();
  const std::size_t d_out = corpus.dim();

  ProjectionHead head =
      init ? std::move(*init) : ProjectionHead::random(d_out, d_in, config.seed);
  if (head.d_in() != d_in || head.d_out() != d_out) {
    throw std::invalid_argument("initial head has the wrong shape");
  }

  const std::size_t n = features.rows();
  const std::size_t batch = std::min(config.batch_size, n);
  auto w = head.weights();
  std::vector<double> m1(w.size(), 0.0);
  std::vector<double> m2(w.size(), 0.0);
  std::vector<double> grad_w(w.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(config.seed, 0x74726169ULL));
  std::size_t step = 0;

  TrainResult result{head, {}};
  result.history.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_schedule(config, epoch);
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t batches = 0;

    for (std::size_t start = 0; start + 2 <= n; start += batch) {
      const std::size_t end = std::min(start + batch, n);
      if (end - start < 2) break;
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      std::vector<std::size_t> rows(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) rows[i] = target_rows[idx[i]];

      const Matrix x = gather_features(features, idx);
      const Matrix t = gather_targets(corpus, rows);
      Matrix q = head.project(x);
      const auto norms = normalize_rows(q);

      const auto loss = recall_surrogate_loss(q, t, config.k, config.tau_rank,
                                              config.tau_recall);
      if (!std::isfinite(loss.loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                           ", step " + std::to_string(step));
      }
      loss_sum += loss.loss;
      ++batches;

      // Chain through normalization and the linear map:
      //   dL/dp = (g - (g.q) q) / |p|,  dL/dW = sum_b dL/dp_b x_b^T
      std::fill(grad_w.begin(), grad_w.end(), 0.0);
      for (std::size_t b = 0; b < idx.size(); ++b) {
        const auto g = loss.grad.row(b);
        const auto qb = q.row(b);
        double gq = 0.0;
        for (std::size_t c = 0; c < d_out; ++c) gq += g[c] * qb[c];
        const auto xb = x.row(b);
        for (std::size_t o = 0; o < d_out; ++o) {
          const double gp = (g[o] - gq * qb[o]) / norms[b];
          if (gp == 0.0) continue;
          double* gw = grad_w.data() + o * d_in;
          for (std::size_t i = 0; i < d_in; ++i) gw[i] += gp * xb[i];
        }
      }

      ++step;
      const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (std::size_t i = 0; i < w.size(); ++i) {
        m1[i] = config.beta1 * m1[i] + (1.0 - config.beta1) * grad_w[i];
        m2[i] = config.beta2 * m2[i] + (1.0 - config.beta2) * grad_w[i] * grad_w[i];
        const double update =
            (m1[i] / bias1) / (std::sqrt(m2[i] / bias2) + config.epsilon);
        w[i] -= lr * (update + config.weight_decay * w[i]);
      }
    }
    result.history.push_back(
        {epoch, lr, batches ? loss_sum / static_cast<double>(batches) : 0.0});
  }
  result.head = std::move(head);
  return result;
}

std::string format_history_csv(std::span<const EpochStats> history) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,lr,mean_loss\n";
  for (const auto& e : history) {
    out << e.epoch << ',' << e.lr << ',' << e.mean_loss << '\n';
  }
  return out.str();
}

double evaluate_in_batch_recall(const ProjectionHead& head,
                                const Matrix& features,
                                std::span<const std::string> positives,
                                const EmbeddingCorpus& corpus, std::size_t k,
                                std::size_t batch_size) {
  if (features.rows() != positives.size() || batch_size < 2) {
    throw std::invalid_argument("bad recall evaluation arguments");
  }
  const auto rows = resolve_rows(positives, corpus);
  double sum = 0.0;
  std::size_t batches = 0;
  for (std::size_t start = 0; start + batch_size <= features.rows();
       start += batch_size) {
    std::vector<std::size_t> idx(batch_size);
    std::iota(idx.begin(), idx.end(), start);
    std::vector<std::size_t> target(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) target[i] = rows[idx[i]];
    Matrix q = head.project(gather_features(features, idx));
    normalize_rows(q);
    sum += hard_recall_at_k(q, gather_targets(corpus, target), k);
    ++batches;
  }
  if (batches == 0) throw std::invalid_argument("fewer rows than one batch");
  return sum / static_cast<double>(batches);
}

SyntheticPairs make_synthetic_pairs(std::size_t n, std::size_t d_in,
                                    std::size_t d_out, double noise,
                                    std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> ids;
  std::vector<float> raw(n * d_out);
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("img" + std::to_string(i));
    for (std::size_t c = 0; c < d_out; ++c) {
      raw[i * d_out + c] = static_cast<float>(rng.normal());
    }
  }
  EmbeddingCorpus images(ids, std::move(raw), d_out);

  Matrix mixing(d_in, d_out);
  for (double& v : mixing.data()) v = rng.normal() / std::sqrt(static_cast<double>(d_out));

  Matrix features(n, d_in);
  for (std::size_t i = 0; i < n; ++i) {
    const auto t = images.row(i);
    for (std::size_t r = 0; r < d_in; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < d_out; ++c) acc += mixing(r, c) * t[c];
      features(i, r) = acc + noise * rng.normal();
    }
  }
  return {std::move(images), std::move(features), std::move(ids)};
}

}  // namespace chatir
