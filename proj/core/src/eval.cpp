// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include "chatir/eval.hpp"

#include <algorithm>
#include <atomic>
#include <memory>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "chatir/error.hpp"

namespace chatir {

namespace {

// Yields the target rank for successive rounds; nullopt once the source
// cannot produce another round.
class RankStream {
 public:
  virtual ~RankStream() = default;
  virtual std::optional<std::size_t> rank_at(std::size_t round) = 0;
  virtual std::optional<Dialog> final_dialog() const { return std::nullopt; }
};

class TraceStream final : public RankStream {
 public:
  explicit TraceStream(const RankTrace& trace) : trace_(trace) {}
  std::optional<std::size_t> rank_at(std::size_t round) override {
    if (round >= trace_.ranks.size()) return std::nullopt;
    return trace_.ranks[round];
  }

 private:
  const RankTrace& trace_;
};

class RecordedStream final : public RankStream {
 public:
  RecordedStream(const DialogExample& example, const EmbeddingCorpus& corpus,
                 Embedder& embedder, std::size_t target_row)
      : example_(example), corpus_(corpus), embedder_(embedder),
        target_row_(target_row) {}

  std::optional<std::size_t> rank_at(std::size_t round) override {
    if (round > example_.dialog.size()) return std::nullopt;
    used_ = round;
    const auto query = serialize_dialog(example_.dialog, round);
    return corpus_.rank_of_row(embed_text(embedder_, query), target_row_);
  }

  std::optional<Dialog> final_dialog() const override {
    return truncate(example_.dialog, used_);
  }

 private:
  const DialogExample& example_;
  const EmbeddingCorpus& corpus_;
  Embedder& embedder_;
  std::size_t target_row_;
  std::size_t used_ = 0;
};

class LiveStream final : public RankStream {
 public:
  LiveStream(const DialogExample& example, const EmbeddingCorpus& corpus,
             Embedder& embedder, const LiveSource& live,
             std::size_t target_row, std::size_t max_rounds)
      : example_(example), corpus_(corpus), embedder_(embedder), live_(live),
        target_row_(target_row),
        dialog_(example.dialog.caption(), {},
                std::max(max_rounds, kDefaultMaxRounds)) {}

  std::optional<std::size_t> rank_at(std::size_t round) override {
    while (dialog_.size() < round) {
      std::string question = live_.questioner.next_question(dialog_);
      std::string answer =
          live_.answerer.answer(question, example_.image_id, dialog_);
      dialog_.append({std::move(question), std::move(answer)});
    }
    const auto query = serialize_dialog(dialog_, round);
    return corpus_.rank_of_row(embed_text(embedder_, query), target_row_);
  }

  std::optional<Dialog> final_dialog() const override { return dialog_; }

 private:
  const DialogExample& example_;
  const EmbeddingCorpus& corpus_;
  Embedder& embedder_;
  const LiveSource& live_;
  std::size_t target_row_;
  Dialog dialog_;
};

struct Outcome {
  bool failed = false;
  std::string error;
  RankTrace trace;
  std::optional<std::size_t> first_hit;
  std::optional<Dialog> dialog;
};

// The stopping protocol, shared by every source.
void drive(RankStream& stream, std::size_t k, std::size_t rounds,
           AtrMode mode, Outcome& out) {
  bool stopped = false;
  out.trace.ranks.reserve(rounds + 1);
  for (std::size_t i = 0; i <= rounds; ++i) {
    std::optional<std::size_t> rank;
    if (!stopped) {
      rank = stream.rank_at(i);
      if (!rank) {
        if (i == 0) throw Error("source produced no round-0 rank");
        stopped = true;
      }
    }
    if (!rank) {
      out.trace.ranks.push_back(out.trace.ranks.back());
      continue;
    }
    out.trace.ranks.push_back(*rank);
    if (!out.first_hit && *rank <= k) {
      out.first_hit = i;
      if (mode == AtrMode::kCarryForward) stopped = true;
    }
  }
  out.dialog = stream.final_dialog();
}

template <typename MakeStream>
std::vector<Outcome> evaluate_all(std::size_t count, std::size_t jobs,
                                  const BenchmarkOptions& options, AtrMode mode,
                                  MakeStream make_stream) {
  std::vector<Outcome> outcomes(count);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      Outcome& out = outcomes[i];
      try {
        auto stream = make_stream(i, out);
        drive(*stream, options.k, options.rounds, mode, out);
      } catch (const std::exception& e) {
        out.failed = true;
        out.error = e.what();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return outcomes;
}

EvalReport summarize(std::vector<Outcome> outcomes,
                     const BenchmarkOptions& options, AtrMode mode,
                     std::string source, std::size_t corpus_size,
                     bool with_dialogs) {
  EvalReport report;
  report.k = options.k;
  report.rounds = options.rounds;
  report.corpus_size = corpus_size;
  report.source = std::move(source);
  report.atr_mode = mode;

  const std::size_t width = options.rounds + 1;
  std::vector<std::size_t> joined(width, 0);
  std::vector<double> rank_sum(width, 0.0);
  std::vector<Dialog> dialogs;
  for (auto& out : outcomes) {
    if (out.failed) {
      report.failures.push_back({out.trace.image_id, out.error});
      continue;
    }
    ++report.n_examples;
    if (out.first_hit) ++joined[*out.first_hit];
    for (std::size_t i = 0; i < width; ++i) {
      rank_sum[i] += static_cast<double>(out.trace.ranks[i]);
    }
    report.per_example.push_back({out.trace.image_id, out.first_hit});
    if (with_dialogs && out.dialog) dialogs.push_back(std::move(*out.dialog));
    report.traces.push_back(std::move(out.trace));
  }

  report.hits_curve.assign(width, 0.0);
  report.atr_curve.assign(width, 0.0);
  if (report.n_examples > 0) {
    const double n = static_cast<double>(report.n_examples);
    std::size_t pool = 0;
    for (std::size_t i = 0; i < width; ++i) {
      pool += joined[i];
      report.hits_curve[i] = static_cast<double>(pool) / n;
      report.atr_curve[i] = rank_sum[i] / n;
    }
  }
  if (!dialogs.empty()) report.repetition = repetition_stats(dialogs);
  return report;
}

}  // namespace

std::string_view to_string(AtrMode mode) {
  return mode == AtrMode::kContinue ? "continue" : "carry_forward";
}

AtrMode parse_atr_mode(std::string_view name) {
  if (name == "continue") return AtrMode::kContinue;
  if (name == "carry_forward") return AtrMode::kCarryForward;
  throw std::invalid_argument("unknown ATR mode '" + std::string(name) + "'");
}

EvalReport run_benchmark(std::span<const DialogExample> examples,
                         const EmbeddingCorpus& corpus, Embedder& embedder,
                         const DialogSource& source,
                         const BenchmarkOptions& options) {
  if (options.k < 1 || options.k > corpus.size()) {
    throw std::invalid_argument("k must lie in [1, corpus size]");
  }
  if (embedder.dim() != corpus.dim()) {
    throw std::invalid_argument("embedder and corpus dimensions differ");
  }
  const bool live = std::holds_alternative<LiveSource>(source);
  const AtrMode mode = options.atr_mode.value_or(
      live ? AtrMode::kCarryForward : AtrMode::kContinue);

  auto outcomes = evaluate_all(
      examples.size(), options.jobs, options, mode,
      [&](std::size_t i, Outcome& out) -> std::unique_ptr<RankStream> {
        const auto& ex = examples[i];
        out.trace.image_id = ex.image_id;
        const auto row = corpus.find(ex.image_id);
        if (!row) throw IntegrityError("target '" + ex.image_id + "' not in corpus");
        if (live) {
          return std::make_unique<LiveStream>(ex, corpus, embedder,
                                              std::get<LiveSource>(source),
                                              *row, options.rounds);
        }
        return std::make_unique<RecordedStream>(ex, corpus, embedder, *row);
      });
  return summarize(std::move(outcomes), options, mode,
                   live ? "live" : "recorded", corpus.size(), true);
}

EvalReport run_benchmark(std::span<const RankTrace> traces,
                         const BenchmarkOptions& options) {
  if (options.k < 1) throw std::invalid_argument("k must be >= 1");
  const AtrMode mode = options.atr_mode.value_or(AtrMode::kContinue);
  auto outcomes = evaluate_all(
      traces.size(), options.jobs, options, mode,
      [&](std::size_t i, Outcome& out) -> std::unique_ptr<RankStream> {
        out.trace.image_id = traces[i].image_id;
        return std::make_unique<TraceStream>(traces[i]);
      });
  return summarize(std::move(outcomes), options, mode, "traces", 0, false);
}

double average_target_rank(std::span<const RankTrace> traces,
                           std::size_t round) {
  if (traces.empty()) throw std::invalid_argument("no rank traces");
  double sum = 0.0;
  for (const auto& t : traces) {
    if (round >= t.ranks.size()) {
      throw std::out_of_range("trace for '" + t.image_id +
                              "' does not cover round " + std::to_string(round));
    }
    sum += static_cast<double>(t.ranks[round]);
  }
  return sum / static_cast<double>(traces.size());
}

RepetitionStats repetition_stats(std::span<const Dialog> dialogs) {
  if (dialogs.empty()) throw std::invalid_argument("no dialogs");
  double repeats = 0.0;
  double dialog_tokens = 0.0;
  double answer_tokens = 0.0;
  std::size_t answers = 0;
  for (const auto& d : dialogs) {
    std::unordered_set<std::string_view> seen;
    std::unordered_set<std::string_view> tokens;
    for (const auto& round : d.rounds()) {
      if (!seen.insert(trim(round.question)).second) repeats += 1.0;
      for (const auto t : split_tokens(round.question)) tokens.insert(t);
      const auto words = split_tokens(round.answer);
      answer_tokens += static_cast<double>(
          std::unordered_set<std::string_view>(words.begin(), words.end()).size());
      ++answers;
    }
    dialog_tokens += static_cast<double>(tokens.size());
  }
  const double n = static_cast<double>(dialogs.size());
  RepetitionStats stats;
  stats.avg_exact_repeats = repeats / n;
  stats.avg_unique_tokens_per_dialog = dialog_tokens / n;
  stats.avg_unique_tokens_per_answer =
      answers ? answer_tokens / static_cast<double>(answers) : 0.0;
  return stats;
}

}  // namespace chatir
