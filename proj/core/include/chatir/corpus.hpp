// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chatir/attribute_table.hpp"
#include "chatir/backends.hpp"
#include "chatir/dialog.hpp"
#include "chatir/index.hpp"

namespace chatir {

struct DialogExample {
  std::string image_id;
  Dialog dialog;

  bool operator==(const DialogExample&) const = default;
};

// ---------------------------------------------------------------------------
// Dataset files

// VisDial-style JSON:
//   {"data": {"dialogs": [{"image_id", "caption",
//                          "dialog": [{"question_index", "answer_index"}]}],
//             "questions": [...], "answers": [...]}}
// Dialogs longer than `max_rounds` are cut. Throws ParseError (naming the
// offending line or field) and IntegrityError for dangling indices.
std::vector<DialogExample> ingest_visdial(
    const std::filesystem::path& path,
    std::size_t max_rounds = kDefaultMaxRounds);
std::vector<DialogExample> parse_visdial(
    std::string_view text, std::size_t max_rounds = kDefaultMaxRounds);

// Writes the same schema, deduplicating question and answer strings.
std::string format_visdial(std::span<const DialogExample> examples);

// JSON Lines: {"image_id", "caption", "rounds": [{"q", "a"}]} per line.
std::string format_jsonl(std::span<const DialogExample> examples);
std::vector<DialogExample> parse_jsonl(std::string_view text);

// Either format, chosen by extension (.jsonl) or content.
std::vector<DialogExample> load_examples(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Masking

enum class MaskStrategy { kNone, kCaptions, kQuestions, kAnswers, kRounds, kTokens };

std::string_view to_string(MaskStrategy strategy);
// Throws std::invalid_argument on an unknown name.
MaskStrategy parse_mask_strategy(std::string_view name);

struct MaskingPolicy {
  MaskStrategy strategy = MaskStrategy::kNone;
  double rate = 0.2;
  std::uint64_t seed = 0;
};

// Replaces each selected component with "[MASK]". Every candidate component
// is selected independently with probability `rate`; the random stream is
// derived from (policy.seed, image_id) so output depends only on inputs.
// Throws std::invalid_argument if rate is outside [0, 1].
DialogExample apply_masking(const DialogExample& example,
                            const MaskingPolicy& policy);

// ---------------------------------------------------------------------------
// Synthetic testbed

struct SyntheticSpec {
  std::size_t n_items = 100;
  std::size_t n_attributes = 5;
  std::size_t attribute_vocab_size = 4;
  // Attributes revealed by the caption; the rest are revealed one per round.
  std::size_t caption_attributes = 0;
  // Require every item to have a distinct attribute tuple.
  bool unique_tuples = true;
};

// Item ids with a text description of each item. Embedding the descriptions
// (see materialize) places the items in the same space as dialog queries.
struct EmbeddingCorpusSource {
  std::vector<std::string> ids;
  std::vector<std::string> descriptions;
};

struct SyntheticCorpus {
  EmbeddingCorpusSource source;
  std::vector<DialogExample> examples;
  AttributeTable attributes;
};

// Deterministic in (spec, seed). Throws std::invalid_argument if the spec
// is degenerate or unique tuples are impossible.
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec,
                                   std::uint64_t seed);

// Embeds each description with the stub embedder.
EmbeddingCorpus materialize(const EmbeddingCorpusSource& source,
                            const HashingEmbedder& embedder);

// ---------------------------------------------------------------------------
// Dialogue augmentation

struct AugmentSeed {
  std::string image_id;
  std::string caption;
};

struct AugmentFailure {
  std::string image_id;
  std::string error;
};

struct AugmentResult {
  std::vector<DialogExample> examples;  // input order, failures skipped
  std::vector<AugmentFailure> failures;
};

std::vector<AugmentSeed> seeds_from(std::span<const DialogExample> examples);

// Generates a fresh `rounds`-round dialog per seed by alternating questioner
// and answerer calls. Up to `max_in_flight` images are processed at once;
// output order always follows input order.
AugmentResult augment_dialogues(std::span<const AugmentSeed> seeds,
                                Questioner& questioner, Answerer& answerer,
                                std::size_t rounds,
                                std::size_t max_in_flight = 1);

std::string format_failures(std::span<const AugmentFailure> failures);

}  // namespace chatir
