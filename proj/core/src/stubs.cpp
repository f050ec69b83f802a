// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "chatir/backends.hpp"
#include "chatir/error.hpp"
#include "chatir/rng.hpp"

namespace chatir {

// ---------------------------------------------------------------------------
// AttributeTable

AttributeTable::AttributeTable(std::vector<std::string> attribute_names)
    : attributes_(std::move(attribute_names)) {}

void AttributeTable::add_item(std::string item_id,
                              std::vector<std::string> values) {
  if (values.size() != attributes_.size()) {
    throw std::invalid_argument("item '" + item_id + "' has " +
                                std::to_string(values.size()) +
                                " values, expected " +
                                std::to_string(attributes_.size()));
  }
  if (!row_of_.emplace(item_id, items_.size()).second) {
    throw std::invalid_argument("duplicate item id '" + item_id + "'");
  }
  items_.push_back(std::move(item_id));
  values_.push_back(std::move(values));
}

bool AttributeTable::contains(std::string_view item_id) const {
  return row_of_.contains(std::string(item_id));
}

std::span<const std::string> AttributeTable::values(
    std::string_view item_id) const {
  const auto it = row_of_.find(std::string(item_id));
  if (it == row_of_.end()) {
    throw std::out_of_range("no attributes for item '" +
                            std::string(item_id) + "'");
  }
  return values_[it->second];
}

std::optional<std::string_view> AttributeTable::value(
    std::string_view item_id, std::string_view attribute) const {
  const auto row = values(item_id);
  for (std::size_t a = 0; a < attributes_.size(); ++a) {
    if (attributes_[a] == attribute) return row[a];
  }
  return std::nullopt;
}

std::string AttributeTable::to_json() const {
  nlohmann::ordered_json j;
  j["attributes"] = attributes_;
  auto items = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < items_.size(); ++i) {
    items.push_back({{"id", items_[i]}, {"values", values_[i]}});
  }
  j["items"] = std::move(items);
  return j.dump(1);
}

AttributeTable AttributeTable::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    AttributeTable table(j.at("attributes").get<std::vector<std::string>>());
    for (const auto& item : j.at("items")) {
      table.add_item(item.at("id").get<std::string>(),
                     item.at("values").get<std::vector<std::string>>());
    }
    return table;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("attribute table: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Embedders

std::vector<float> embed_text(Embedder& embedder,
                              const SerializedQuery& query) {
  if (trim(query.text).empty()) {
    throw std::invalid_argument("cannot embed empty text");
  }
  auto v = embedder.embed(query);
  if (v.size() != embedder.dim()) {
    throw Error("embedder returned " + std::to_string(v.size()) +
                " values, expected " + std::to_string(embedder.dim()));
  }
  return v;
}

HashingEmbedder::HashingEmbedder(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim_ == 0) throw std::invalid_argument("embedder dim must be > 0");
}

std::size_t HashingEmbedder::bucket_of(std::string_view token) const {
  return static_cast<std::size_t>(mix_seed(fnv1a64(token), seed_) % dim_);
}

std::vector<float> HashingEmbedder::embed_raw(std::string_view text) const {
  std::vector<double> counts(dim_, 0.0);
  for (const auto token : split_tokens(text)) counts[bucket_of(token)] += 1.0;
  double sq = 0.0;
  for (const double c : counts) sq += c * c;
  std::vector<float> out(dim_, 0.0f);
  if (sq == 0.0) return out;
  const double inv = 1.0 / std::sqrt(sq);
  for (std::size_t i = 0; i < dim_; ++i) {
    out[i] = static_cast<float>(counts[i] * inv);
  }
  return out;
}

std::vector<float> HashingEmbedder::embed(const SerializedQuery& query) {
  if (split_tokens(query.text).empty()) {
    throw std::invalid_argument("cannot embed empty text");
  }
  return embed_raw(query.text);
}

// ---------------------------------------------------------------------------
// Questioners

TemplateQuestioner::TemplateQuestioner(std::vector<std::string> questions)
    : questions_(std::move(questions)) {
  if (questions_.empty()) {
    throw std::invalid_argument("template questioner needs questions");
  }
  for (const auto& q : questions_) {
    if (q.empty()) throw std::invalid_argument("empty template question");
  }
}

std::string TemplateQuestioner::next_question(const Dialog& dialog) {
  return questions_[dialog.size() % questions_.size()];
}

std::vector<std::string> attribute_questions(
    std::span<const std::string> attributes) {
  std::vector<std::string> out;
  out.reserve(attributes.size());
  for (const auto& a : attributes) out.push_back("what is its " + a + "?");
  return out;
}

RecordedQuestioner::RecordedQuestioner(Dialog stored)
    : RecordedQuestioner(std::vector<Dialog>{std::move(stored)}) {}

RecordedQuestioner::RecordedQuestioner(std::vector<Dialog> stored) {
  for (auto& d : stored) {
    const std::string caption = d.caption();
    by_caption_.insert_or_assign(caption, std::move(d));
  }
}

std::string RecordedQuestioner::next_question(const Dialog& dialog) {
  const auto it = by_caption_.find(dialog.caption());
  if (it == by_caption_.end()) {
    throw IntegrityError("no recorded dialog for caption '" +
                         dialog.caption() + "'");
  }
  const auto rounds = it->second.rounds();
  if (dialog.size() >= rounds.size()) {
    throw ExhaustedError("recorded dialog exhausted after " +
                         std::to_string(rounds.size()) + " rounds");
  }
  return rounds[dialog.size()].question;
}

// ---------------------------------------------------------------------------
// Answerers

RecordedAnswerer::RecordedAnswerer(
    std::unordered_map<std::string, Dialog> stored)
    : stored_(std::move(stored)) {}

std::string RecordedAnswerer::answer(std::string_view /*question*/,
                                     std::string_view target_id,
                                     const Dialog& history) {
  const auto it = stored_.find(std::string(target_id));
  if (it == stored_.end()) {
    throw IntegrityError("no recorded dialog for image '" +
                         std::string(target_id) + "'");
  }
  const auto rounds = it->second.rounds();
  if (history.size() >= rounds.size()) {
    throw ExhaustedError("recorded answers exhausted after " +
                         std::to_string(rounds.size()) + " rounds");
  }
  return rounds[history.size()].answer;
}

OracleAnswerer::OracleAnswerer(std::shared_ptr<const AttributeTable> table)
    : table_(std::move(table)) {
  if (!table_) throw std::invalid_argument("oracle answerer needs a table");
}

std::string OracleAnswerer::answer(std::string_view question,
                                   std::string_view target_id,
                                   const Dialog& /*history*/) {
  if (!table_->contains(target_id)) {
    throw IntegrityError("oracle has no attributes for image '" +
                         std::string(target_id) + "'");
  }
  for (auto token : split_tokens(question)) {
    while (!token.empty() &&
           !std::isalnum(static_cast<unsigned char>(token.back()))) {
      token.remove_suffix(1);
    }
    if (const auto v = table_->value(target_id, token)) return std::string(*v);
  }
  return std::string(kUnknownAnswer);
}

}  // namespace chatir
