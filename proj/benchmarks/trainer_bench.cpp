// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <cmath>

#include "chatir/rng.hpp"
#include "chatir/trainer.hpp"

namespace {

chatir::Matrix unit_rows(chatir::Rng& rng, std::size_t rows, std::size_t cols) {
  chatir::Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double norm = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      m(r, c) = rng.normal();
      norm += m(r, c) * m(r, c);
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) /= std::sqrt(norm);
  }
  return m;
}

void BM_SurrogateLoss(benchmark::State& state) {
  chatir::Rng rng(3);
  const auto b = static_cast<std::size_t>(state.range(0));
  const auto q = unit_rows(rng, b, 256);
  const auto t = unit_rows(rng, b, 256);
  for (auto _ : state) benchmark::DoNotOptimize(chatir::recall_surrogate_loss(q, t, 10, 0.05, 1.0));
}
BENCHMARK(BM_SurrogateLoss)->Arg(64)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_TrainEpoch(benchmark::State& state) {
  const auto data = chatir::make_synthetic_pairs(1024, 64, 32, 0.1, 5);
  chatir::TrainerConfig config;
  config.epochs = 1;
  config.batch_size = 128;
  config.learning_rate = 1e-2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(chatir::train(data.features, data.positives, data.images, config));
  }
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace
