// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include "chatir/corpus.hpp"

#include <unordered_map>

#include <json.hpp>

#include "chatir/embedding_io.hpp"
#include "chatir/error.hpp"

namespace chatir {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string id_string(const json& value, const std::string& where) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw ParseError(where + ": expected string or integer image_id");
}

const json& field(const json& obj, const char* name, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  const auto it = obj.find(name);
  if (it == obj.end()) {
    throw ParseError(where + ": missing field '" + name + "'");
  }
  return *it;
}

std::size_t index_field(const json& entry, const char* primary,
                        const char* fallback, const std::string& where) {
  auto it = entry.find(primary);
  if (it == entry.end()) it = entry.find(fallback);
  if (it == entry.end()) {
    throw ParseError(where + ": missing field '" + primary + "'");
  }
  if (!it->is_number_integer()) {
    throw ParseError(where + "." + primary + ": expected an integer");
  }
  const auto v = it->get<long long>();
  if (v < 0) {
    throw IntegrityError(where + "." + primary + ": negative index " +
                         std::to_string(v));
  }
  return static_cast<std::size_t>(v);
}

std::vector<std::string> string_list(const json& list,
                                     const std::string& where) {
  if (!list.is_array()) throw ParseError(where + ": expected an array");
  std::vector<std::string> out;
  out.reserve(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (!list[i].is_string()) {
      throw ParseError(where + "[" + std::to_string(i) + "]: expected a string");
    }
    out.push_back(list[i].get<std::string>());
  }
  return out;
}

}  // namespace

std::vector<DialogExample> parse_visdial(std::string_view text,
                                         std::size_t max_rounds) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("visdial: ") + e.what());
  }
  const auto& data = field(doc, "data", "visdial");
  const auto questions = string_list(field(data, "questions", "data"),
                                     "data.questions");
  const auto answers = string_list(field(data, "answers", "data"),
                                   "data.answers");
  const auto& dialogs = field(data, "dialogs", "data");
  if (!dialogs.is_array()) throw ParseError("data.dialogs: expected an array");

  std::vector<DialogExample> out;
  out.reserve(dialogs.size());
  for (std::size_t d = 0; d < dialogs.size(); ++d) {
    const std::string where = "data.dialogs[" + std::to_string(d) + "]";
    const auto& entry = dialogs[d];
    std::string image_id = id_string(field(entry, "image_id", where),
                                     where + ".image_id");
    const auto& caption = field(entry, "caption", where);
    if (!caption.is_string()) throw ParseError(where + ".caption: expected a string");
    const auto& turns = field(entry, "dialog", where);
    if (!turns.is_array()) throw ParseError(where + ".dialog: expected an array");

    std::vector<Round> rounds;
    const std::size_t used = std::min(turns.size(), max_rounds);
    rounds.reserve(used);
    for (std::size_t r = 0; r < turns.size(); ++r) {
      const std::string at = where + ".dialog[" + std::to_string(r) + "]";
      const auto qi = index_field(turns[r], "question_index", "question", at);
      const auto ai = index_field(turns[r], "answer_index", "answer", at);
      // Validate every turn, including those past the round limit.
      if (qi >= questions.size()) {
        throw IntegrityError(at + ": question_index " + std::to_string(qi) +
                             " out of range (" +
                             std::to_string(questions.size()) + " questions)");
      }
      if (ai >= answers.size()) {
        throw IntegrityError(at + ": answer_index " + std::to_string(ai) +
                             " out of range (" +
                             std::to_string(answers.size()) + " answers)");
      }
      if (r < used) rounds.push_back({questions[qi], answers[ai]});
    }
    try {
      out.push_back({std::move(image_id),
                     Dialog(caption.get<std::string>(), std::move(rounds),
                            max_rounds)});
    } catch (const std::invalid_argument& e) {
      throw IntegrityError(where + ": " + e.what());
    }
  }
  return out;
}

std::vector<DialogExample> ingest_visdial(const std::filesystem::path& path,
                                          std::size_t max_rounds) {
  const std::string text = read_file(path);
  try {
    return parse_visdial(text, max_rounds);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const IntegrityError& e) {
    throw IntegrityError(path.string() + ": " + e.what());
  }
}

std::string format_visdial(std::span<const DialogExample> examples) {
  std::vector<std::string> questions;
  std::vector<std::string> answers;
  std::unordered_map<std::string, std::size_t> q_index;
  std::unordered_map<std::string, std::size_t> a_index;
  const auto intern = [](std::vector<std::string>& pool,
                         std::unordered_map<std::string, std::size_t>& index,
                         const std::string& s) {
    const auto [it, inserted] = index.emplace(s, pool.size());
    if (inserted) pool.push_back(s);
    return it->second;
  };

  auto dialogs = ordered_json::array();
  for (const auto& ex : examples) {
    auto turns = ordered_json::array();
    for (const auto& round : ex.dialog.rounds()) {
      turns.push_back({{"question_index", intern(questions, q_index, round.question)},
                       {"answer_index", intern(answers, a_index, round.answer)}});
    }
    dialogs.push_back({{"image_id", ex.image_id},
                       {"caption", ex.dialog.caption()},
                       {"dialog", std::move(turns)}});
  }
  ordered_json doc;
  doc["data"]["dialogs"] = std::move(dialogs);
  doc["data"]["questions"] = questions;
  doc["data"]["answers"] = answers;
  return doc.dump(1) + "\n";
}

std::string format_jsonl(std::span<const DialogExample> examples) {
  std::string out;
  for (const auto& ex : examples) {
    auto rounds = ordered_json::array();
    for (const auto& round : ex.dialog.rounds()) {
      rounds.push_back({{"q", round.question}, {"a", round.answer}});
    }
    const ordered_json line = {{"image_id", ex.image_id},
                               {"caption", ex.dialog.caption()},
                               {"rounds", std::move(rounds)}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<DialogExample> parse_jsonl(std::string_view text) {
  std::vector<DialogExample> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    try {
      const auto j = json::parse(line);
      std::vector<Round> rounds;
      for (const auto& r : field(j, "rounds", where)) {
        rounds.push_back({field(r, "q", where).get<std::string>(),
                          field(r, "a", where).get<std::string>()});
      }
      out.push_back({id_string(field(j, "image_id", where), where),
                     Dialog(field(j, "caption", where).get<std::string>(),
                            std::move(rounds))});
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw IntegrityError(where + ": " + e.what());
    } catch (const std::length_error& e) {
      throw IntegrityError(where + ": " + e.what());
    }
  }
  return out;
}

std::vector<DialogExample> load_examples(const std::filesystem::path& path) {
  if (path.extension() == ".jsonl") {
    const auto text = read_file(path);
    try {
      return parse_jsonl(text);
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
  }
  return ingest_visdial(path);
}

std::vector<AugmentSeed> seeds_from(std::span<const DialogExample> examples) {
  std::vector<AugmentSeed> seeds;
  seeds.reserve(examples.size());
  for (const auto& ex : examples) {
    seeds.push_back({ex.image_id, ex.dialog.caption()});
  }
  return seeds;
}

}  // namespace chatir
