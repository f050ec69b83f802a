// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace chatir {

// Ground-truth attribute values per item, used by the oracle answerer.
class AttributeTable {
 public:
  AttributeTable() = default;
  explicit AttributeTable(std::vector<std::string> attribute_names);

  // Throws std::invalid_argument on a duplicate id or wrong value count.
  void add_item(std::string item_id, std::vector<std::string> values);

  std::span<const std::string> attributes() const noexcept {
    return attributes_;
  }
  std::span<const std::string> item_ids() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool contains(std::string_view item_id) const;

  // Values of one item in attribute order. Throws std::out_of_range.
  std::span<const std::string> values(std::string_view item_id) const;
  std::optional<std::string_view> value(std::string_view item_id,
                                        std::string_view attribute) const;

  std::string to_json() const;
  static AttributeTable from_json(std::string_view text);

  bool operator==(const AttributeTable& other) const {
    return attributes_ == other.attributes_ && items_ == other.items_ &&
           values_ == other.values_;
  }

 private:
  std::vector<std::string> attributes_;
  std::vector<std::string> items_;
  std::vector<std::vector<std::string>> values_;
  std::unordered_map<std::string, std::size_t> row_of_;
};

}  // namespace chatir
