// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chatir {

// Joins consecutive dialog elements in a serialized query.
inline constexpr std::string_view kSeparator = " [SEP] ";

// Placeholder substituted for masked dialog components.
inline constexpr std::string_view kMaskToken = "[MASK]";

inline constexpr std::size_t kDefaultMaxRounds = 10;

struct Round {
  std::string question;
  // Empty while the question awaits an answer.
  std::string answer;

  bool operator==(const Round&) const = default;
};

// A caption followed by question/answer rounds. A dialog with zero rounds
// is the caption-only query. Values are immutable once shared; mutation
// goes through append() on an owned copy.
class Dialog {
 public:
  explicit Dialog(std::string caption, std::vector<Round> rounds = {},
                  std::size_t max_rounds = kDefaultMaxRounds);

  const std::string& caption() const noexcept { return caption_; }
  std::span<const Round> rounds() const noexcept { return rounds_; }
  std::size_t size() const noexcept { return rounds_.size(); }
  std::size_t max_rounds() const noexcept { return max_rounds_; }
  bool full() const noexcept { return rounds_.size() >= max_rounds_; }

  // Throws std::length_error when the dialog is full and
  // std::invalid_argument on an empty question.
  void append(Round round);

  bool operator==(const Dialog& other) const {
    return caption_ == other.caption_ && rounds_ == other.rounds_;
  }

 private:
  std::string caption_;
  std::vector<Round> rounds_;
  std::size_t max_rounds_;
};

struct SerializedQuery {
  std::string text;
  std::size_t round_index = 0;

  bool operator==(const SerializedQuery&) const = default;
};

// Caption and the first `upto_round` rounds joined as
// "C [SEP] Q1 [SEP] A1 [SEP] ... [SEP] Qi [SEP] Ai".
// Throws std::out_of_range if upto_round exceeds the round count and
// std::invalid_argument if an included round has no answer yet.
SerializedQuery serialize_dialog(const Dialog& dialog, std::size_t upto_round);

// Same caption, first `rounds` rounds. Throws std::out_of_range.
Dialog truncate(const Dialog& dialog, std::size_t rounds);

// Whitespace tokenization shared by the stub embedder, masking and the
// statistics code.
std::vector<std::string_view> split_tokens(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace chatir
