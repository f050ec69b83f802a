// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <mutex>
#include <set>
#include <thread>

#include "chatir/corpus.hpp"
#include "chatir/embedding_io.hpp"
#include "chatir/error.hpp"

using namespace chatir;
namespace fs = std::filesystem;

namespace {

constexpr const char* kOneDog = R"({
  "data": {
    "questions": ["is it big?", "what color?"],
    "answers": ["no", "brown"],
    "dialogs": [
      {"image_id": 42, "caption": "a dog",
       "dialog": [{"question_index": 0, "answer_index": 0},
                  {"question_index": 1, "answer_index": 1}]}
    ]
  }
})";

std::vector<DialogExample> many_examples(std::size_t n, std::size_t rounds) {
  std::vector<DialogExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Round> rs;
    for (std::size_t r = 0; r < rounds; ++r) {
      rs.push_back({"question number " + std::to_string(r) + " here?",
                    "answer " + std::to_string(r) + " text"});
    }
    out.push_back({"img" + std::to_string(i),
                   Dialog("caption of image " + std::to_string(i), std::move(rs))});
  }
  return out;
}

bool is_mask(const std::string& s) { return s == kMaskToken; }

}  // namespace

TEST_CASE("visdial ingestion") {
  const auto ex = parse_visdial(kOneDog);
  REQUIRE(ex.size() == 1);
  CHECK(ex[0].image_id == "42");
  CHECK(ex[0].dialog.caption() == "a dog");
  REQUIRE(ex[0].dialog.size() == 2);
  CHECK(ex[0].dialog.rounds()[1] == Round{"what color?", "brown"});

  CHECK(parse_visdial(R"({"data":{"questions":[],"answers":[],"dialogs":[]}})").empty());

  const auto capped = parse_visdial(kOneDog, 1);
  CHECK(capped[0].dialog.size() == 1);
}

TEST_CASE("visdial errors") {
  CHECK_THROWS_WITH_AS(
      parse_visdial(R"({"data":{"questions":["q"],"answers":["a"],
        "dialogs":[{"image_id":"x","caption":"c","dialog":[{"question_index":0,"answer_index":3}]}]}})"),
      doctest::Contains("data.dialogs[0].dialog[0]: answer_index 3"), IntegrityError);
  CHECK_THROWS_AS(parse_visdial("{not json"), ParseError);
  CHECK_THROWS_WITH_AS(parse_visdial(R"({"data":{"questions":[],"answers":[]}})"),
                       doctest::Contains("dialogs"), ParseError);
  CHECK_THROWS_AS(
      parse_visdial(R"({"data":{"questions":[],"answers":[],
        "dialogs":[{"image_id":"x","caption":5,"dialog":[]}]}})"),
      ParseError);
}

TEST_CASE("visdial and jsonl round trips") {
  const auto ex = many_examples(4, 3);
  CHECK(parse_visdial(format_visdial(ex)) == ex);
  const auto lines = format_jsonl(ex);
  CHECK(parse_jsonl(lines) == ex);
  CHECK(lines.find(R"({"image_id":"img0","caption":"caption of image 0","rounds":[{"q":)") == 0);

  const auto dir = fs::temp_directory_path();
  write_file(dir / "chatir_corpus_test.jsonl", lines);
  write_file(dir / "chatir_corpus_test.json", format_visdial(ex));
  CHECK(load_examples(dir / "chatir_corpus_test.jsonl") == ex);
  CHECK(ingest_visdial(dir / "chatir_corpus_test.json") == ex);
  CHECK_THROWS_AS(ingest_visdial(dir / "does_not_exist.json"), Error);
  fs::remove(dir / "chatir_corpus_test.jsonl");
  fs::remove(dir / "chatir_corpus_test.json");
  CHECK_THROWS_AS(parse_jsonl("{\"image_id\":\"a\"}\n"), ParseError);
}

TEST_CASE("mask strategy names") {
  for (auto s : {MaskStrategy::kNone, MaskStrategy::kCaptions, MaskStrategy::kQuestions,
                 MaskStrategy::kAnswers, MaskStrategy::kRounds, MaskStrategy::kTokens}) {
    CHECK(parse_mask_strategy(to_string(s)) == s);
  }
  CHECK_THROWS_AS(parse_mask_strategy("everything"), std::invalid_argument);
}

TEST_CASE("masking examples") {
  const DialogExample bus{"b1", Dialog("a red bus", {{"is it day?", "yes"}})};
  const auto masked = apply_masking(bus, {MaskStrategy::kCaptions, 1.0, 3});
  CHECK(masked.dialog.caption() == "[MASK]");
  CHECK(masked.dialog.rounds()[0] == bus.dialog.rounds()[0]);
  CHECK(apply_masking(bus, {MaskStrategy::kNone, 0.9, 3}) == bus);
  CHECK_THROWS_AS(apply_masking(bus, {MaskStrategy::kTokens, 1.5, 3}), std::invalid_argument);
  const auto all_tokens = apply_masking(bus, {MaskStrategy::kTokens, 1.0, 3});
  CHECK(all_tokens.dialog.caption() == "[MASK] [MASK] [MASK]");
  CHECK(all_tokens.dialog.rounds()[0].question == "[MASK] [MASK] [MASK]");
}

TEST_CASE("mask rate over ten thousand components") {
  const auto ex = many_examples(1000, 10);
  for (auto strategy : {MaskStrategy::kQuestions, MaskStrategy::kAnswers, MaskStrategy::kRounds}) {
    std::size_t masked = 0;
    std::size_t total = 0;
    for (const auto& e : ex) {
      const auto m = apply_masking(e, {strategy, 0.2, 2024});
      for (const auto& r : m.dialog.rounds()) {
        ++total;
        const bool hit = strategy == MaskStrategy::kAnswers ? is_mask(r.answer) : is_mask(r.question);
        if (hit) ++masked;
      }
    }
    const double rate = static_cast<double>(masked) / static_cast<double>(total);
    CHECK(total == 10000);
    CHECK(rate >= 0.19);
    CHECK(rate <= 0.21);
  }
}

TEST_CASE("masking scope rules") {
  const auto ex = many_examples(300, 10);
  for (const auto& e : ex) {
    const auto c = apply_masking(e, {MaskStrategy::kCaptions, 0.5, 5});
    CHECK(std::equal(c.dialog.rounds().begin(), c.dialog.rounds().end(), e.dialog.rounds().begin()));

    const auto a = apply_masking(e, {MaskStrategy::kAnswers, 0.5, 5});
    CHECK(a.dialog.caption() == e.dialog.caption());
    for (std::size_t r = 0; r < e.dialog.size(); ++r) {
      CHECK(a.dialog.rounds()[r].question == e.dialog.rounds()[r].question);
      const auto& ans = a.dialog.rounds()[r].answer;
      CHECK((ans == e.dialog.rounds()[r].answer || is_mask(ans)));
    }

    const auto rr = apply_masking(e, {MaskStrategy::kRounds, 0.5, 5});
    CHECK(rr.dialog.caption() == e.dialog.caption());
    for (const auto& r : rr.dialog.rounds()) CHECK(is_mask(r.question) == is_mask(r.answer));

    const auto q = apply_masking(e, {MaskStrategy::kQuestions, 0.5, 5});
    CHECK(q.dialog.caption() == e.dialog.caption());
    for (std::size_t r = 0; r < e.dialog.size(); ++r) {
      CHECK(q.dialog.rounds()[r].answer == e.dialog.rounds()[r].answer);
    }
  }
}

TEST_CASE("token masking keeps whitespace and hits the rate") {
  const auto ex = many_examples(200, 10);
  std::size_t masked = 0;
  std::size_t total = 0;
  for (const auto& e : ex) {
    const auto m = apply_masking(e, {MaskStrategy::kTokens, 0.2, 77});
    const auto count = [&](const std::string& before, const std::string& after) {
      const auto b = split_tokens(before);
      const auto a = split_tokens(after);
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        ++total;
        if (a[i] == kMaskToken) {
          ++masked;
        } else {
          CHECK(a[i] == b[i]);
        }
      }
    };
    count(e.dialog.caption(), m.dialog.caption());
    for (std::size_t r = 0; r < e.dialog.size(); ++r) {
      count(e.dialog.rounds()[r].question, m.dialog.rounds()[r].question);
      count(e.dialog.rounds()[r].answer, m.dialog.rounds()[r].answer);
    }
  }
  CHECK(total >= 10000);
  const double rate = static_cast<double>(masked) / static_cast<double>(total);
  CHECK(rate >= 0.19);
  CHECK(rate <= 0.21);
}

TEST_CASE("masking is deterministic per seed") {
  const auto ex = many_examples(50, 10);
  for (auto s : {MaskStrategy::kCaptions, MaskStrategy::kQuestions, MaskStrategy::kAnswers,
                 MaskStrategy::kRounds, MaskStrategy::kTokens}) {
    std::vector<DialogExample> a, b, c;
    for (const auto& e : ex) {
      a.push_back(apply_masking(e, {s, 0.3, 11}));
      b.push_back(apply_masking(e, {s, 0.3, 11}));
      c.push_back(apply_masking(e, {s, 0.3, 12}));
    }
    CHECK(format_jsonl(a) == format_jsonl(b));
    CHECK(format_jsonl(a) != format_jsonl(c));
  }
}

TEST_CASE("two-item synthetic corpus is separable from the caption") {
  const auto s = generate_synthetic({2, 1, 2, 1, true}, 1);
  REQUIRE(s.examples.size() == 2);
  CHECK(s.examples[0].dialog.caption() != s.examples[1].dialog.caption());
  CHECK(s.examples[0].dialog.size() == 0);
  HashingEmbedder e(64, 0);
  const auto corpus = materialize(s.source, e);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto q = e.embed({s.examples[i].dialog.caption(), 0});
    CHECK(corpus.rank_of(q, s.examples[i].image_id) == 1);
  }
}

TEST_CASE("unique tuples identify every item by the final round") {
  const SyntheticSpec spec{100, 5, 4, 0, true};
  const auto s = generate_synthetic(spec, 9);
  REQUIRE(s.attributes.size() == 100);
  // Pairwise comparison of attribute tuples.
  for (std::size_t i = 0; i < 100; ++i) {
    for (std::size_t j = i + 1; j < 100; ++j) {
      const auto a = s.attributes.values(s.attributes.item_ids()[i]);
      const auto b = s.attributes.values(s.attributes.item_ids()[j]);
      CHECK_FALSE(std::equal(a.begin(), a.end(), b.begin()));
    }
  }
  std::set<std::string> finals;
  for (const auto& ex : s.examples) {
    CHECK(ex.dialog.size() == 5);
    finals.insert(serialize_dialog(ex.dialog, 5).text);
    for (std::size_t r = 0; r < 5; ++r) {
      const auto& round = ex.dialog.rounds()[r];
      CHECK(round.answer == *s.attributes.value(ex.image_id, s.attributes.attributes()[r]));
    }
  }
  CHECK(finals.size() == 100);
}

TEST_CASE("synthetic generation is deterministic") {
  const SyntheticSpec spec{50, 4, 3, 1, true};
  const auto a = generate_synthetic(spec, 5);
  const auto b = generate_synthetic(spec, 5);
  const auto c = generate_synthetic(spec, 6);
  CHECK(format_jsonl(a.examples) == format_jsonl(b.examples));
  CHECK(a.attributes.to_json() == b.attributes.to_json());
  CHECK(a.source.descriptions == b.source.descriptions);
  CHECK(format_jsonl(a.examples) != format_jsonl(c.examples));
  CHECK_THROWS_AS(generate_synthetic({100, 2, 2, 0, true}, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_synthetic({0, 2, 2, 0, true}, 1), std::invalid_argument);
}

TEST_CASE("sparse tuple space uses rejection sampling") {
  const auto s = generate_synthetic({200, 8, 6, 0, true}, 3);
  std::set<std::vector<std::string>> tuples;
  for (auto id : s.attributes.item_ids()) {
    const auto v = s.attributes.values(id);
    tuples.emplace(v.begin(), v.end());
  }
  CHECK(tuples.size() == 200);
}

namespace {

// Answers from the table, but fails for one configured image.
class FlakyAnswerer final : public Answerer {
 public:
  FlakyAnswerer(std::shared_ptr<const AttributeTable> t, std::string bad)
      : inner_(std::move(t)), bad_(std::move(bad)) {}
  std::string answer(std::string_view q, std::string_view id, const Dialog& h) override {
    if (id == bad_) throw IntegrityError("no record");
    return inner_.answer(q, id, h);
  }

 private:
  OracleAnswerer inner_;
  std::string bad_;
};

}  // namespace

TEST_CASE("augmentation") {
  const auto s = generate_synthetic({20, 3, 3, 0, true}, 2);
  auto table = std::make_shared<AttributeTable>(s.attributes);
  TemplateQuestioner q(attribute_questions(s.attributes.attributes()));
  OracleAnswerer oracle(table);
  const auto seeds = seeds_from(s.examples);

  const auto one = augment_dialogues(std::span(seeds).first(1), q, oracle, 3);
  REQUIRE(one.examples.size() == 1);
  CHECK(one.examples[0].dialog.size() == 3);
  CHECK(one.examples[0].dialog == s.examples[0].dialog);

  CHECK(augment_dialogues({}, q, oracle, 3).examples.empty());
  CHECK_THROWS_AS(augment_dialogues(seeds, q, oracle, 0), std::invalid_argument);

  FlakyAnswerer flaky(table, seeds[7].image_id);
  const auto partial = augment_dialogues(seeds, q, flaky, 2, 4);
  CHECK(partial.examples.size() == seeds.size() - 1);
  REQUIRE(partial.failures.size() == 1);
  CHECK(partial.failures[0].image_id == seeds[7].image_id);
  CHECK(partial.failures[0].error.find(seeds[7].image_id) != std::string::npos);
  std::size_t j = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i == 7) continue;
    CHECK(partial.examples[j++].image_id == seeds[i].image_id);
  }
  const auto manifest = format_failures(partial.failures);
  CHECK(manifest.find("\"failures\"") != std::string::npos);

  const auto serial = augment_dialogues(seeds, q, oracle, 3, 1);
  const auto parallel = augment_dialogues(seeds, q, oracle, 3, 8);
  CHECK(format_jsonl(serial.examples) == format_jsonl(parallel.examples));
}
