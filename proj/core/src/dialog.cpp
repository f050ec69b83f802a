// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include "chatir/dialog.hpp"

#include <stdexcept>
#include <utility>

namespace chatir {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

}  // namespace

Dialog::Dialog(std::string caption, std::vector<Round> rounds,
               std::size_t max_rounds)
    : caption_(std::move(caption)), max_rounds_(max_rounds) {
  if (caption_.empty()) {
    throw std::invalid_argument("dialog caption must not be empty");
  }
  if (rounds.size() > max_rounds_) {
    throw std::length_error("dialog has " + std::to_string(rounds.size()) +
                            " rounds, limit is " +
                            std::to_string(max_rounds_));
  }
  rounds_.reserve(rounds.size());
  for (auto& round : rounds) append(std::move(round));
}

void Dialog::append(Round round) {
  if (full()) {
    throw std::length_error("dialog already holds the maximum of " +
                            std::to_string(max_rounds_) + " rounds");
  }
  if (round.question.empty()) {
    throw std::invalid_argument("round question must not be empty");
  }
  rounds_.push_back(std::move(round));
}

SerializedQuery serialize_dialog(const Dialog& dialog,
                                 std::size_t upto_round) {
  const auto rounds = dialog.rounds();
  if (upto_round > rounds.size()) {
    throw std::out_of_range("serialize_dialog: round " +
                            std::to_string(upto_round) + " requested but " +
                            "dialog has " + std::to_string(rounds.size()));
  }
  std::size_t length = dialog.caption().size();
  for (std::size_t i = 0; i < upto_round; ++i) {
    if (rounds[i].answer.empty()) {
      throw std::invalid_argument("serialize_dialog: round " +
                                  std::to_string(i + 1) + " has no answer");
    }
    length += 2 * kSeparator.size() + rounds[i].question.size() +
              rounds[i].answer.size();
  }

  SerializedQuery query;
  query.round_index = upto_round;
  query.text.reserve(length);
  query.text += dialog.caption();
  for (std::size_t i = 0; i < upto_round; ++i) {
    query.text += kSeparator;
    query.text += rounds[i].question;
    query.text += kSeparator;
    query.text += rounds[i].answer;
  }
  return query;
}

Dialog truncate(const Dialog& dialog, std::size_t rounds) {
  const auto all = dialog.rounds();
  if (rounds > all.size()) {
    throw std::out_of_range("truncate: " + std::to_string(rounds) +
                            " rounds requested but dialog has " +
                            std::to_string(all.size()));
  }
  return Dialog(dialog.caption(),
                std::vector<Round>(all.begin(), all.begin() + rounds),
                dialog.max_rounds());
}

std::vector<std::string_view> split_tokens(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) tokens.push_back(text.substr(start, i - start));
  }
  return tokens;
}

std::string_view trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && is_space(text[begin])) ++begin;
  while (end > begin && is_space(text[end - 1])) --end;
  return text.substr(begin, end - begin);
}

}  // namespace chatir
