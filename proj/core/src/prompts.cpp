// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include "chatir/prompts.hpp"

#include <cctype>
#include <stdexcept>

#include "chatir/error.hpp"

namespace chatir {

namespace {

void render_dialog(std::string& out, const Dialog& dialog) {
  out += "Caption: ";
  out += dialog.caption();
  out += '\n';
  for (const auto& round : dialog.rounds()) {
    out += "Question: ";
    out += round.question;
    out += "\nAnswer: ";
    out += round.answer;
    out += '\n';
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::string_view strip_prefix_ci(std::string_view line,
                                 std::string_view prefix) {
  if (line.size() < prefix.size()) return line;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(line[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return line;
    }
  }
  return trim(line.substr(prefix.size()));
}

}  // namespace

std::vector<PromptShot> default_prompt_shots() {
  Dialog zebra("2 full grown zebras standing by a brick building with a "
               "steel door",
               {{"is this picture in color?", "yes"},
                {"do you see people?", "no"}});
  return {PromptShot{std::move(zebra), "are the animals in a pen?"}};
}

std::string build_fewshot_prompt(const Dialog& dialog,
                                 std::span<const PromptShot> shots) {
  std::string out(kFewShotInstruction);
  out += '\n';
  for (const auto& shot : shots) {
    if (shot.next_question.empty()) {
      throw std::invalid_argument("prompt shot without a next question");
    }
    render_dialog(out, shot.dialog);
    out += "Question: ";
    out += shot.next_question;
    out += "\n\n";
  }
  render_dialog(out, dialog);
  out += "Question:";
  return out;
}

std::string build_unanswered_prompt(std::string_view caption) {
  if (caption.empty()) {
    throw std::invalid_argument("unanswered prompt needs a caption");
  }
  std::string out(kUnansweredTemplate);
  const auto at = out.find("[CAPTION]");
  out.replace(at, std::string_view("[CAPTION]").size(), caption);
  return out;
}

std::string extract_question(std::string_view completion) {
  for (const auto raw : lines_of(completion)) {
    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto question = strip_prefix_ci(line, "Question:");
    if (!question.empty()) return std::string(question);
  }
  throw std::invalid_argument("completion contains no question");
}

std::vector<std::string> parse_numbered_questions(
    std::string_view completion) {
  std::vector<std::string> out;
  for (const auto raw : lines_of(completion)) {
    auto line = trim(raw);
    if (line.empty()) continue;
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i])))
      ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
      line = trim(line.substr(i + 1));
    } else if (line.front() == '-' || line.front() == '*') {
      line = trim(line.substr(1));
    }
    line = strip_prefix_ci(line, "Question:");
    if (!line.empty()) out.emplace_back(line);
  }
  return out;
}

FewShotQuestioner::FewShotQuestioner(std::shared_ptr<CompletionBackend> llm,
                                     std::vector<PromptShot> shots)
    : llm_(std::move(llm)), shots_(std::move(shots)) {
  if (!llm_) throw std::invalid_argument("few-shot questioner needs an LLM");
}

std::string FewShotQuestioner::next_question(const Dialog& dialog) {
  return extract_question(llm_->complete(build_fewshot_prompt(dialog, shots_)));
}

UnansweredQuestioner::UnansweredQuestioner(
    std::shared_ptr<CompletionBackend> llm)
    : llm_(std::move(llm)) {
  if (!llm_) throw std::invalid_argument("unanswered questioner needs an LLM");
}

std::string UnansweredQuestioner::next_question(const Dialog& dialog) {
  std::vector<std::string> questions;
  {
    std::lock_guard lock(mutex_);
    const auto it = by_caption_.find(dialog.caption());
    if (it != by_caption_.end()) questions = it->second;
  }
  if (questions.empty()) {
    // Generated outside the lock; emplace keeps whichever result lands first.
    questions = parse_numbered_questions(
        llm_->complete(build_unanswered_prompt(dialog.caption())));
    std::lock_guard lock(mutex_);
    by_caption_.emplace(dialog.caption(), questions);
  }
  if (dialog.size() >= questions.size()) {
    throw ExhaustedError("unanswered questioner produced only " +
                         std::to_string(questions.size()) + " questions");
  }
  return questions[dialog.size()];
}

}  // namespace chatir
