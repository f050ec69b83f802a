// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include <stdexcept>

#include "chatir/corpus.hpp"
#include "chatir/rng.hpp"

namespace chatir {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Masks whitespace-delimited tokens in place; separators are kept as-is.
std::string mask_tokens(std::string_view text, double rate, Rng& rng) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_space(text[i])) {
      out.push_back(text[i++]);
      continue;
    }
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (rng.bernoulli(rate)) {
      out += kMaskToken;
    } else {
      out.append(text.substr(start, i - start));
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(MaskStrategy strategy) {
  switch (strategy) {
    case MaskStrategy::kNone: return "none";
    case MaskStrategy::kCaptions: return "captions";
    case MaskStrategy::kQuestions: return "questions";
    case MaskStrategy::kAnswers: return "answers";
    case MaskStrategy::kRounds: return "rounds";
    case MaskStrategy::kTokens: return "tokens";
  }
  return "none";
}

MaskStrategy parse_mask_strategy(std::string_view name) {
  for (const auto s : {MaskStrategy::kNone, MaskStrategy::kCaptions,
                       MaskStrategy::kQuestions, MaskStrategy::kAnswers,
                       MaskStrategy::kRounds, MaskStrategy::kTokens}) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown masking strategy '" +
                              std::string(name) + "'");
}

DialogExample apply_masking(const DialogExample& example,
                            const MaskingPolicy& policy) {
  if (!(policy.rate >= 0.0 && policy.rate <= 1.0)) {
    throw std::invalid_argument("mask rate must lie in [0, 1]");
  }
  if (policy.strategy == MaskStrategy::kNone) return example;

  Rng rng(mix_seed(policy.seed, fnv1a64(example.image_id)));
  const double rate = policy.rate;
  const Dialog& src = example.dialog;

  std::string caption = src.caption();
  std::vector<Round> rounds(src.rounds().begin(), src.rounds().end());

  switch (policy.strategy) {
    case MaskStrategy::kNone:
      break;
    case MaskStrategy::kCaptions:
      if (rng.bernoulli(rate)) caption = kMaskToken;
      break;
    case MaskStrategy::kQuestions:
      for (auto& r : rounds) {
        if (rng.bernoulli(rate)) r.question = kMaskToken;
      }
      break;
    case MaskStrategy::kAnswers:
      for (auto& r : rounds) {
        if (rng.bernoulli(rate)) r.answer = kMaskToken;
      }
      break;
    case MaskStrategy::kRounds:
      for (auto& r : rounds) {
        if (rng.bernoulli(rate)) {
          r.question = kMaskToken;
          r.answer = kMaskToken;
        }
      }
      break;
    case MaskStrategy::kTokens:
      caption = mask_tokens(caption, rate, rng);
      for (auto& r : rounds) {
        r.question = mask_tokens(r.question, rate, rng);
        r.answer = mask_tokens(r.answer, rate, rng);
      }
      break;
  }
  return {example.image_id,
          Dialog(std::move(caption), std::move(rounds), src.max_rounds())};
}

}  // namespace chatir
