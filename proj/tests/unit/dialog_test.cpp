// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <stdexcept>
#include <string>

#include "chatir/dialog.hpp"
#include "chatir/rng.hpp"

using namespace chatir;

namespace {

std::size_t count_occurrences(const std::string& text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

Dialog random_dialog(Rng& rng, std::size_t rounds) {
  static const char* words[] = {"red", "bus", "is", "it", "day?", "yes", "no", "two", "dogs"};
  auto phrase = [&] {
    std::string s;
    const auto len = 1 + rng.below(4);
    for (std::uint64_t i = 0; i < len; ++i) {
      if (i) s += ' ';
      s += words[rng.below(9)];
    }
    return s;
  };
  Dialog d(phrase());
  for (std::size_t i = 0; i < rounds; ++i) d.append({phrase(), phrase()});
  return d;
}

}  // namespace

TEST_CASE("zero rounds serializes to the caption") {
  const Dialog d("a red bus");
  const auto q = serialize_dialog(d, 0);
  CHECK(q.text == "a red bus");
  CHECK(q.round_index == 0);
}

TEST_CASE("one round joins with the separator") {
  const Dialog d("a red bus", {{"is it day?", "yes"}});
  CHECK(serialize_dialog(d, 1).text == "a red bus [SEP] is it day? [SEP] yes");
}

TEST_CASE("later rounds are excluded from a prefix") {
  const Dialog d("a red bus", {{"is it day?", "yes"}, {"people?", "no"}});
  const auto q = serialize_dialog(d, 1);
  CHECK(q.text == "a red bus [SEP] is it day? [SEP] yes");
  CHECK(q.round_index == 1);
  CHECK(serialize_dialog(d, 2).text ==
        "a red bus [SEP] is it day? [SEP] yes [SEP] people? [SEP] no");
}

TEST_CASE("serialize rejects out-of-range rounds and pending answers") {
  Dialog d("a red bus", {{"is it day?", "yes"}});
  CHECK_THROWS_AS(serialize_dialog(d, 2), std::out_of_range);
  d.append({"people?", ""});
  CHECK_NOTHROW(serialize_dialog(d, 1));
  CHECK_THROWS_AS(serialize_dialog(d, 2), std::invalid_argument);
}

TEST_CASE("dialog invariants") {
  CHECK_THROWS_AS(Dialog(""), std::invalid_argument);
  CHECK_THROWS_AS(Dialog("c", {{"", "a"}}), std::invalid_argument);
  Dialog d("c", {}, 2);
  d.append({"q1", "a1"});
  d.append({"q2", "a2"});
  CHECK(d.full());
  CHECK_THROWS_AS(d.append({"q3", "a3"}), std::length_error);
  CHECK_THROWS_AS(Dialog("c", {{"q", "a"}, {"q", "a"}}, 1), std::length_error);
  CHECK(Dialog("c").max_rounds() == kDefaultMaxRounds);
}

TEST_CASE("masked placeholders serialize like any text") {
  const Dialog d(std::string(kMaskToken), {{std::string(kMaskToken), "yes"}});
  CHECK(serialize_dialog(d, 1).text == "[MASK] [SEP] [MASK] [SEP] yes");
}

TEST_CASE("truncate keeps the prefix and leaves the original alone") {
  const Dialog d("c", {{"q1", "a1"}, {"q2", "a2"}, {"q3", "a3"}});
  const auto t0 = truncate(d, 0);
  CHECK(t0.caption() == "c");
  CHECK(t0.size() == 0);
  CHECK(truncate(d, 3) == d);
  const auto t2 = truncate(d, 2);
  REQUIRE(t2.size() == 2);
  CHECK(t2.rounds()[0] == Round{"q1", "a1"});
  CHECK(t2.rounds()[1] == Round{"q2", "a2"});
  CHECK(d.size() == 3);
  CHECK_THROWS_AS(truncate(d, 4), std::out_of_range);
}

TEST_CASE("serialization properties over random dialogs") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rounds = rng.below(11);
    const Dialog d = random_dialog(rng, rounds);
    for (std::size_t i = 0; i <= rounds; ++i) {
      const auto text = serialize_dialog(d, i).text;
      CHECK(count_occurrences(text, kSeparator) == 2 * i);
      CHECK(serialize_dialog(truncate(d, i), i).text == text);
      if (i < rounds) {
        const auto next = serialize_dialog(d, i + 1).text;
        CHECK(next.size() > text.size());
        CHECK(next.compare(0, text.size(), text) == 0);
      }
    }
  }
}

TEST_CASE("token helpers") {
  const auto tokens = split_tokens("  a\tbb \n c ");
  REQUIRE(tokens.size() == 3);
  CHECK(tokens[0] == "a");
  CHECK(tokens[1] == "bb");
  CHECK(tokens[2] == "c");
  CHECK(split_tokens("   ").empty());
  CHECK(trim("  x y \n") == "x y");
  CHECK(trim("") == "");
}
