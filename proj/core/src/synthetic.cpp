// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "chatir/corpus.hpp"
#include "chatir/rng.hpp"

namespace chatir {

namespace {

constexpr std::string_view kBaseNames[] = {
    "color", "shape", "size", "material", "pattern", "texture", "finish",
    "style"};

std::string attribute_name(std::size_t a) {
  if (a < std::size(kBaseNames)) return std::string(kBaseNames[a]);
  return "attribute" + std::to_string(a);
}

std::string item_id(std::size_t i, std::size_t n) {
  const int width = static_cast<int>(std::to_string(n > 0 ? n - 1 : 0).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "item%0*zu", width, i);
  return buf;
}

// vocab^attrs, saturating at max.
std::uint64_t tuple_space(std::size_t vocab, std::size_t attrs) {
  std::uint64_t total = 1;
  for (std::size_t a = 0; a < attrs; ++a) {
    if (total > std::numeric_limits<std::uint64_t>::max() / vocab) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    total *= vocab;
  }
  return total;
}

std::vector<std::size_t> decode(std::uint64_t code, std::size_t vocab,
                                std::size_t attrs) {
  std::vector<std::size_t> values(attrs);
  for (std::size_t a = 0; a < attrs; ++a) {
    values[a] = static_cast<std::size_t>(code % vocab);
    code /= vocab;
  }
  return values;
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec,
                                   std::uint64_t seed) {
  if (spec.n_items == 0 || spec.n_attributes == 0 ||
      spec.attribute_vocab_size == 0) {
    throw std::invalid_argument("synthetic spec sizes must be positive");
  }
  if (spec.caption_attributes > spec.n_attributes) {
    throw std::invalid_argument(
        "caption cannot reveal more attributes than items have");
  }
  const std::size_t vocab = spec.attribute_vocab_size;
  const std::size_t attrs = spec.n_attributes;
  const std::uint64_t space = tuple_space(vocab, attrs);
  if (spec.unique_tuples && space < spec.n_items) {
    throw std::invalid_argument(
        "unique tuples impossible: " + std::to_string(space) +
        " combinations for " + std::to_string(spec.n_items) + " items");
  }

  Rng rng(seed);
  std::vector<std::uint64_t> codes;
  codes.reserve(spec.n_items);
  if (spec.unique_tuples && space <= 4 * static_cast<std::uint64_t>(spec.n_items)) {
    std::vector<std::uint64_t> all(space);
    std::iota(all.begin(), all.end(), std::uint64_t{0});
    rng.shuffle(std::span<std::uint64_t>(all));
    codes.assign(all.begin(), all.begin() + static_cast<long>(spec.n_items));
  } else {
    std::unordered_set<std::uint64_t> seen;
    while (codes.size() < spec.n_items) {
      std::uint64_t code = 0;
      for (std::size_t a = 0; a < attrs; ++a) code = code * vocab + rng.below(vocab);
      if (spec.unique_tuples && !seen.insert(code).second) continue;
      codes.push_back(code);
    }
  }

  std::vector<std::string> names;
  for (std::size_t a = 0; a < attrs; ++a) names.push_back(attribute_name(a));
  const auto questions = attribute_questions(names);
  const std::size_t scripted =
      std::min(attrs - spec.caption_attributes, kDefaultMaxRounds);

  SyntheticCorpus out{{}, {}, AttributeTable(names)};
  out.source.ids.reserve(spec.n_items);
  out.source.descriptions.reserve(spec.n_items);
  out.examples.reserve(spec.n_items);
  for (std::size_t i = 0; i < spec.n_items; ++i) {
    const auto digits = decode(codes[i], vocab, attrs);
    std::vector<std::string> values;
    values.reserve(attrs);
    for (std::size_t a = 0; a < attrs; ++a) {
      values.push_back(names[a] + std::to_string(digits[a]));
    }

    std::string description;
    for (const auto& v : values) {
      if (!description.empty()) description += ' ';
      description += v;
    }

    std::string caption = "a photo of an object";
    for (std::size_t a = 0; a < spec.caption_attributes; ++a) {
      caption += (a == 0 ? " with " : " ");
      caption += values[a];
    }

    std::vector<Round> rounds;
    for (std::size_t r = 0; r < scripted; ++r) {
      const std::size_t a = spec.caption_attributes + r;
      rounds.push_back({questions[a], values[a]});
    }

    std::string id = item_id(i, spec.n_items);
    out.source.ids.push_back(id);
    out.source.descriptions.push_back(std::move(description));
    out.examples.push_back({id, Dialog(std::move(caption), std::move(rounds))});
    out.attributes.add_item(std::move(id), std::move(values));
  }
  return out;
}

EmbeddingCorpus materialize(const EmbeddingCorpusSource& source,
                            const HashingEmbedder& embedder) {
  if (source.ids.size() != source.descriptions.size()) {
    throw std::invalid_argument("corpus source ids/descriptions mismatch");
  }
  std::vector<float> values;
  values.reserve(source.ids.size() * embedder.dim());
  for (const auto& text : source.descriptions) {
    const auto v = embedder.embed_raw(text);
    values.insert(values.end(), v.begin(), v.end());
  }
  return EmbeddingCorpus(source.ids, std::move(values), embedder.dim());
}

}  // namespace chatir
