// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chatir/backends.hpp"
#include "chatir/corpus.hpp"
#include "chatir/index.hpp"

namespace chatir {

// How target ranks behave after an example enters the success pool.
//   kContinue      keep extending the dialog and record fresh ranks
//   kCarryForward  stop generating and repeat the rank at the hit round
enum class AtrMode { kContinue, kCarryForward };

std::string_view to_string(AtrMode mode);
AtrMode parse_atr_mode(std::string_view name);

struct RankTrace {
  std::string image_id;
  std::vector<std::size_t> ranks;  // index = round, 1-based ranks
};

struct RepetitionStats {
  double avg_exact_repeats = 0.0;
  double avg_unique_tokens_per_dialog = 0.0;
  double avg_unique_tokens_per_answer = 0.0;

  bool operator==(const RepetitionStats&) const = default;
};

struct ExampleOutcome {
  std::string image_id;
  std::optional<std::size_t> first_hit_round;
};

struct EvalFailure {
  std::string image_id;
  std::string error;
};

struct EvalReport {
  std::size_t k = 0;
  std::size_t rounds = 0;
  std::size_t n_examples = 0;  // excludes failures
  std::size_t corpus_size = 0;
  std::string source;
  AtrMode atr_mode = AtrMode::kContinue;
  std::vector<double> hits_curve;  // cumulative success pool / N, rounds+1
  std::vector<double> atr_curve;   // mean target rank, rounds+1
  std::vector<ExampleOutcome> per_example;
  std::optional<RepetitionStats> repetition;
  std::vector<EvalFailure> failures;
  std::vector<RankTrace> traces;  // not serialized
};

// Replays the dialogs stored in each example.
struct RecordedSource {};

// Generates dialogs on the fly. The questioner never sees the target id.
struct LiveSource {
  Questioner& questioner;
  Answerer& answerer;
};

using DialogSource = std::variant<RecordedSource, LiveSource>;

struct BenchmarkOptions {
  std::size_t k = 10;
  std::size_t rounds = 10;
  // Defaults: kContinue for recorded sources, kCarryForward for live ones.
  std::optional<AtrMode> atr_mode;
  std::size_t jobs = 1;
};

// For each example and round i = 0..rounds: serialize D_i, embed, rank the
// target. An example joins the success pool at its first round with
// rank <= k and stays there. Examples whose backends fail are listed in
// `failures` and excluded from every curve.
EvalReport run_benchmark(std::span<const DialogExample> examples,
                         const EmbeddingCorpus& corpus, Embedder& embedder,
                         const DialogSource& source,
                         const BenchmarkOptions& options);

// Same protocol driven by precomputed rank traces (a trace shorter than
// `rounds + 1` carries its last rank forward).
EvalReport run_benchmark(std::span<const RankTrace> traces,
                         const BenchmarkOptions& options);

// Mean rank at `round`. Throws std::invalid_argument on empty input and
// std::out_of_range if a trace does not reach the round.
double average_target_rank(std::span<const RankTrace> traces,
                           std::size_t round);

// Exact repeats: questions equal (after trimming) to an earlier question in
// the same dialog. Unique tokens per dialog: distinct whitespace tokens over
// its questions. Unique tokens per answer: mean over all answers.
// Throws std::invalid_argument on empty input.
RepetitionStats repetition_stats(std::span<const Dialog> dialogs);

// {k, rounds, n, corpus_size, source, atr_mode, hits_curve, atr_curve,
//  per_example:[{id, first_hit_round}], repetition:{...}, failures:[...]}
std::string format_report_json(const EvalReport& report);

// "round,hits_at_k,avg_target_rank"
std::string format_curves_csv(const EvalReport& report);

struct CurvePoint {
  std::size_t round = 0;
  double hits = 0.0;
  double avg_rank = 0.0;
};
std::vector<CurvePoint> parse_curves_csv(std::string_view text);

// Two-panel SVG line chart: Hits@K and average target rank per round.
std::string render_curves_svg(std::span<const CurvePoint> points,
                              std::string_view title = "");

}  // namespace chatir
