// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <json.hpp>

#include "chatir/error.hpp"
#include "chatir/eval.hpp"
#include "oracles.hpp"
#include "simulation.hpp"

using namespace chatir;

namespace {

std::vector<RankTrace> random_traces(Rng& rng, std::size_t count, std::size_t rounds,
                                     std::size_t max_rank) {
  std::vector<RankTrace> out;
  for (std::size_t i = 0; i < count; ++i) {
    RankTrace t{"t" + std::to_string(i), {}};
    for (std::size_t r = 0; r <= rounds; ++r) t.ranks.push_back(1 + rng.below(max_rank));
    out.push_back(std::move(t));
  }
  return out;
}

// Throws for one chosen image, otherwise embeds with the stub.
class FailingEmbedder final : public Embedder {
 public:
  FailingEmbedder(std::size_t dim, std::string poison) : inner_(dim), poison_(std::move(poison)) {}
  std::size_t dim() const override { return inner_.dim(); }
  std::vector<float> embed(const SerializedQuery& q) override {
    if (q.text.find(poison_) != std::string::npos) throw TransportError("embedder down", 503, 2);
    return inner_.embed(q);
  }

 private:
  HashingEmbedder inner_;
  std::string poison_;
};

}  // namespace

TEST_CASE("three hand-made traces") {
  const std::vector<RankTrace> traces = {
      {"a", {12, 8, 30, 30}}, {"b", {3, 50, 50, 50}}, {"c", {40, 55, 9, 20}}};
  BenchmarkOptions o;
  o.k = 10;
  o.rounds = 3;
  const auto r = run_benchmark(traces, o);
  REQUIRE(r.per_example.size() == 3);
  CHECK(r.per_example[0].first_hit_round == 1u);
  CHECK(r.per_example[1].first_hit_round == 0u);
  CHECK(r.per_example[2].first_hit_round == 2u);
  CHECK(r.hits_curve == std::vector<double>{1.0 / 3, 2.0 / 3, 1.0, 1.0});
  CHECK(r.n_examples == 3);
  // continue mode averages the raw ranks
  CHECK(r.atr_curve[0] == doctest::Approx((12 + 3 + 40) / 3.0));
  CHECK(r.atr_curve[3] == doctest::Approx((30 + 50 + 20) / 3.0));

  o.atr_mode = AtrMode::kCarryForward;
  const auto cf = run_benchmark(traces, o);
  CHECK(cf.hits_curve == r.hits_curve);
  CHECK(cf.atr_curve[3] == doctest::Approx((8 + 3 + 9) / 3.0));
  CHECK(cf.atr_mode == AtrMode::kCarryForward);
}

TEST_CASE("k at corpus size gives a flat unit curve") {
  Rng rng(1);
  const auto traces = random_traces(rng, 30, 10, 100);
  BenchmarkOptions o;
  o.k = 100;
  const auto r = run_benchmark(traces, o);
  for (double h : r.hits_curve) CHECK(h == 1.0);
}

TEST_CASE("hits curve equals the min-rank closed form on random traces") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t rounds = 1 + rng.below(10);
    const auto traces = random_traces(rng, 200, rounds, 60);
    BenchmarkOptions o;
    o.k = 1 + rng.below(20);
    o.rounds = rounds;
    const auto r = run_benchmark(traces, o);
    CHECK(r.hits_curve == oracle::min_rank_hits_curve(traces, o.k, rounds));
    for (std::size_t i = 1; i < r.hits_curve.size(); ++i) CHECK(r.hits_curve[i] >= r.hits_curve[i - 1]);
  }
}

TEST_CASE("average target rank") {
  const std::vector<RankTrace> two = {{"a", {1149}}, {"b", {3}}};
  CHECK(average_target_rank(two, 0) == 576.0);
  const std::vector<RankTrace> one = {{"a", {17, 4}}};
  CHECK(average_target_rank(one, 1) == 4.0);
  const std::vector<RankTrace> ones = {{"a", {1}}, {"b", {1}}, {"c", {1}}};
  CHECK(average_target_rank(ones, 0) == 1.0);
  CHECK_THROWS_AS(average_target_rank({}, 0), std::invalid_argument);
  CHECK_THROWS_AS(average_target_rank(one, 5), std::out_of_range);
}

TEST_CASE("repetition statistics") {
  std::vector<Round> same(10, Round{"is it red?", "no"});
  std::vector<Round> distinct;
  for (int i = 0; i < 10; ++i) distinct.push_back({"question " + std::to_string(i), "yes"});
  CHECK(repetition_stats(std::vector<Dialog>{Dialog("c", same)}).avg_exact_repeats == 9.0);
  CHECK(repetition_stats(std::vector<Dialog>{Dialog("c", distinct)}).avg_exact_repeats == 0.0);

  const Dialog answers("c", {{"q1", "yes"}, {"q2", "yes it is"}});
  CHECK(repetition_stats(std::vector<Dialog>{answers}).avg_unique_tokens_per_answer == 2.0);

  // "is it red?" twice (one repeat after trimming) plus "  is it red? " → 2 repeats;
  // tokens {is, it, red?, big?} = 4.
  const Dialog mixed("c", {{"is it red?", "no"}, {"is it big?", "no no"}, {"  is it red? ", "yes"},
                           {"is it red?", "a b c"}});
  const auto s = repetition_stats(std::vector<Dialog>{mixed, Dialog("c", distinct)});
  CHECK(s.avg_exact_repeats == 1.0);
  CHECK(s.avg_unique_tokens_per_dialog == (4.0 + 11.0) / 2.0);
  CHECK(s.avg_unique_tokens_per_answer == (1.0 + 1.0 + 1.0 + 3.0 + 10.0) / 14.0);
  CHECK_THROWS_AS(repetition_stats(std::vector<Dialog>{}), std::invalid_argument);
}

TEST_CASE("recorded benchmark on a synthetic corpus") {
  const auto data = generate_synthetic({120, 4, 4, 0, true}, 3);
  HashingEmbedder emb(128, 1);
  const auto corpus = materialize(data.source, emb);
  BenchmarkOptions o;
  o.k = 5;
  o.rounds = 4;
  const auto r = run_benchmark(data.examples, corpus, emb, RecordedSource{}, o);
  CHECK(r.source == "recorded");
  CHECK(r.atr_mode == AtrMode::kContinue);
  CHECK(r.n_examples == 120);
  CHECK(r.corpus_size == 120);
  CHECK(r.hits_curve.size() == 5);
  CHECK(r.hits_curve.back() > r.hits_curve.front());
  // Round 0 depends only on the caption, shared by every item.
  for (const auto& t : r.traces) {
    const auto row = *corpus.find(t.image_id);
    const auto q = emb.embed({data.examples[0].dialog.caption(), 0});
    CHECK(t.ranks[0] == corpus.rank_of_row(q, row));
  }
  REQUIRE(r.repetition.has_value());
  CHECK(r.repetition->avg_exact_repeats == 0.0);
}

TEST_CASE("recorded dialogs shorter than the horizon carry their last rank") {
  const auto data = generate_synthetic({30, 2, 6, 0, true}, 4);
  HashingEmbedder emb(64, 1);
  const auto corpus = materialize(data.source, emb);
  BenchmarkOptions o;
  o.k = 1;
  o.rounds = 6;
  const auto r = run_benchmark(data.examples, corpus, emb, RecordedSource{}, o);
  for (const auto& t : r.traces) {
    REQUIRE(t.ranks.size() == 7);
    for (std::size_t i = 3; i < 7; ++i) CHECK(t.ranks[i] == t.ranks[2]);
  }
}

TEST_CASE("live benchmark matches the independent simulation") {
  const auto data = generate_synthetic({300, 5, 4, 0, true}, 5);
  HashingEmbedder emb(128, 2);
  const auto corpus = materialize(data.source, emb);
  auto table = std::make_shared<AttributeTable>(data.attributes);
  TemplateQuestioner q(attribute_questions(data.attributes.attributes()));
  OracleAnswerer a(table);
  BenchmarkOptions o;
  o.k = 10;
  o.rounds = 10;
  const auto report = run_benchmark(data.examples, corpus, emb, LiveSource{q, a}, o);
  const auto sim = oracle::simulate_live_synthetic(data, corpus, emb, 10, 10);
  CHECK(report.hits_curve == sim.hits);
  CHECK(report.atr_curve == sim.atr);
  CHECK(format_report_json(report) == sim.json);
  CHECK(report.hits_curve[5] > report.hits_curve[0]);

  o.jobs = 4;
  const auto parallel = run_benchmark(data.examples, corpus, emb, LiveSource{q, a}, o);
  CHECK(format_report_json(parallel) == format_report_json(report));
}

TEST_CASE("live source in continue mode keeps asking after a hit") {
  const auto data = generate_synthetic({40, 3, 4, 0, true}, 6);
  HashingEmbedder emb(64, 2);
  const auto corpus = materialize(data.source, emb);
  auto table = std::make_shared<AttributeTable>(data.attributes);
  TemplateQuestioner q(attribute_questions(data.attributes.attributes()));
  OracleAnswerer a(table);
  BenchmarkOptions o;
  o.k = 5;
  o.rounds = 4;
  o.atr_mode = AtrMode::kContinue;
  const auto cont = run_benchmark(data.examples, corpus, emb, LiveSource{q, a}, o);
  o.atr_mode = AtrMode::kCarryForward;
  const auto carry = run_benchmark(data.examples, corpus, emb, LiveSource{q, a}, o);
  CHECK(cont.hits_curve == carry.hits_curve);
  // With every round generated, 4 rounds over 3 attributes repeat one question.
  CHECK(cont.repetition->avg_exact_repeats == 1.0);
  CHECK(carry.repetition->avg_exact_repeats < 1.0);
}

TEST_CASE("failed examples are excluded from the curves") {
  const auto data = generate_synthetic({50, 3, 4, 1, true}, 7);
  const auto poison = data.examples[9].dialog.caption();
  FailingEmbedder emb(64, poison);
  HashingEmbedder plain(64);
  const auto corpus = materialize(data.source, plain);
  BenchmarkOptions o;
  o.k = 3;
  o.rounds = 2;
  const auto r = run_benchmark(data.examples, corpus, emb, RecordedSource{}, o);
  // Captions reveal one attribute, so several items can share the poisoned caption.
  std::size_t poisoned = 0;
  std::vector<DialogExample> healthy;
  for (const auto& ex : data.examples) {
    if (ex.dialog.caption() == poison) {
      ++poisoned;
    } else {
      healthy.push_back(ex);
    }
  }
  CHECK(r.failures.size() == poisoned);
  CHECK(r.n_examples == 50 - poisoned);
  const auto clean = run_benchmark(healthy, corpus, plain, RecordedSource{}, o);
  CHECK(r.hits_curve == clean.hits_curve);
  CHECK(r.atr_curve == clean.atr_curve);

  std::vector<DialogExample> unknown = {{"nope", Dialog("c")}};
  const auto missing = run_benchmark(unknown, corpus, plain, RecordedSource{}, o);
  CHECK(missing.failures.size() == 1);
  CHECK(missing.n_examples == 0);
}

TEST_CASE("report and curve formats") {
  const std::vector<RankTrace> traces = {{"a", {12, 8}}, {"b", {3, 50}}};
  BenchmarkOptions o;
  o.k = 10;
  o.rounds = 1;
  const auto r = run_benchmark(traces, o);
  const auto text = format_report_json(r);
  CHECK(text == format_report_json(run_benchmark(traces, o)));
  const auto j = nlohmann::json::parse(text);
  CHECK(j["k"] == 10);
  CHECK(j["n"] == 2);
  CHECK(j["hits_curve"][1] == 1.0);
  CHECK(j["per_example"][0]["first_hit_round"] == 1);
  CHECK(j["repetition"].is_null());
  CHECK(j["failures"].empty());

  const auto csv = format_curves_csv(r);
  CHECK(csv == "round,hits_at_k,avg_target_rank\n0,0.5,7.5\n1,1,29\n");
  const auto points = parse_curves_csv(csv);
  REQUIRE(points.size() == 2);
  CHECK(points[1].avg_rank == 29.0);
  CHECK_THROWS_AS(parse_curves_csv("round,hits\n0;1;2\n"), ParseError);

  const auto svg = render_curves_svg(points, "demo");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("demo") != std::string::npos);
  CHECK(parse_atr_mode("carry_forward") == AtrMode::kCarryForward);
  CHECK_THROWS_AS(parse_atr_mode("sometimes"), std::invalid_argument);
}
