// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "chatir/index.hpp"
#include "chatir/rng.hpp"

namespace {

chatir::EmbeddingCorpus make_corpus(std::size_t n, std::size_t dim) {
  chatir::Rng rng(1);
  std::vector<std::string> ids;
  std::vector<float> values(n * dim);
  for (std::size_t i = 0; i < n; ++i) ids.push_back("img" + std::to_string(i));
  for (auto& v : values) v = static_cast<float>(rng.normal());
  return chatir::build_corpus(std::move(ids), std::move(values), dim);
}

std::vector<float> make_query(std::size_t dim, std::uint64_t seed) {
  chatir::Rng rng(seed);
  std::vector<float> q(dim);
  for (auto& v : q) v = static_cast<float>(rng.normal());
  return q;
}

const chatir::EmbeddingCorpus& corpus_50k() {
  static const auto corpus = make_corpus(50000, 256);
  return corpus;
}

void BM_Search(benchmark::State& state) {
  const auto& corpus = corpus_50k();
  const auto q = make_query(corpus.dim(), 7);
  const auto k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(corpus.search(q, k));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(corpus.size()));
}
BENCHMARK(BM_Search)->Arg(1)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_RankOf(benchmark::State& state) {
  const auto& corpus = corpus_50k();
  const auto q = make_query(corpus.dim(), 8);
  for (auto _ : state) benchmark::DoNotOptimize(corpus.rank_of_row(q, 12345));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(corpus.size()));
}
BENCHMARK(BM_RankOf)->Unit(benchmark::kMillisecond);

void BM_SearchAndRank(benchmark::State& state) {
  const auto& corpus = corpus_50k();
  const auto q = make_query(corpus.dim(), 9);
  for (auto _ : state) benchmark::DoNotOptimize(corpus.search_and_rank(q, 10, 12345));
}
BENCHMARK(BM_SearchAndRank)->Unit(benchmark::kMillisecond);

void BM_Build(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(make_corpus(n, 256));
}
BENCHMARK(BM_Build)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
