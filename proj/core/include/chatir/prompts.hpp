// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "chatir/backends.hpp"
#include "chatir/dialog.hpp"

namespace chatir {

inline constexpr std::string_view kFewShotInstruction =
    "Ask a new question in the following dialog, assume that the questions "
    "are designed to help us retrieve this image from a large collection of "
    "images:";

inline constexpr std::string_view kUnansweredTemplate =
    "Write 10 short questions about the image described by the following "
    "caption. Assume that the questions are designed to help us retrieve "
    "this image from a large collection of images: [CAPTION]";

// A worked example for the few-shot prompt: a dialog and the question that
// followed it.
struct PromptShot {
  Dialog dialog;
  std::string next_question;
};

// The zebra example used as the single default shot.
std::vector<PromptShot> default_prompt_shots();

// Instruction line, every shot as
//   Caption: ...\nQuestion: ...\nAnswer: ...\n...Question: <next>\n\n
// then the live dialog in the same layout, ending with a bare "Question:".
std::string build_fewshot_prompt(const Dialog& dialog,
                                 std::span<const PromptShot> shots);

// Throws std::invalid_argument on an empty caption. The caption is
// inserted verbatim (newlines included).
std::string build_unanswered_prompt(std::string_view caption);

// First non-empty line with any leading "Question:" cue removed.
// Throws std::invalid_argument if nothing is left.
std::string extract_question(std::string_view completion);

// Splits a numbered list ("1. ...", "2) ...", "- ...") into questions.
std::vector<std::string> parse_numbered_questions(std::string_view completion);

// Few-shot questioner over a completion backend.
class FewShotQuestioner final : public Questioner {
 public:
  FewShotQuestioner(std::shared_ptr<CompletionBackend> llm,
                    std::vector<PromptShot> shots);
  std::string next_question(const Dialog& dialog) override;

 private:
  std::shared_ptr<CompletionBackend> llm_;
  std::vector<PromptShot> shots_;
};

// Generates all questions for a caption in one call and serves them by
// round; answers never influence later questions.
class UnansweredQuestioner final : public Questioner {
 public:
  explicit UnansweredQuestioner(std::shared_ptr<CompletionBackend> llm);
  std::string next_question(const Dialog& dialog) override;

 private:
  std::shared_ptr<CompletionBackend> llm_;
  std::mutex mutex_;
  std::unordered_map<std::string, std::vector<std::string>> by_caption_;
};

}  // namespace chatir
