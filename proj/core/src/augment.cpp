// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <atomic>
#include <optional>
#include <stdexcept>
#include <thread>
#include <variant>

#include <json.hpp>

#include "chatir/corpus.hpp"

namespace chatir {

namespace {

DialogExample run_one(const AugmentSeed& seed, Questioner& questioner,
                      Answerer& answerer, std::size_t rounds) {
  Dialog dialog(seed.caption, {}, std::max(rounds, kDefaultMaxRounds));
  for (std::size_t r = 0; r < rounds; ++r) {
    std::string question = questioner.next_question(dialog);
    std::string answer = answerer.answer(question, seed.image_id, dialog);
    dialog.append({std::move(question), std::move(answer)});
  }
  return {seed.image_id, std::move(dialog)};
}

}  // namespace

AugmentResult augment_dialogues(std::span<const AugmentSeed> seeds,
                                Questioner& questioner, Answerer& answerer,
                                std::size_t rounds,
                                std::size_t max_in_flight) {
  if (rounds == 0) throw std::invalid_argument("augmentation needs rounds >= 1");

  using Outcome = std::variant<std::monostate, DialogExample, std::string>;
  std::vector<Outcome> outcomes(seeds.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < seeds.size();
         i = next.fetch_add(1)) {
      try {
        outcomes[i] = run_one(seeds[i], questioner, answerer, rounds);
      } catch (const std::exception& e) {
        outcomes[i] = std::string("image ") + seeds[i].image_id + ": " + e.what();
      }
    }
  };

  const std::size_t threads =
      std::clamp<std::size_t>(max_in_flight, 1, std::max<std::size_t>(seeds.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  AugmentResult result;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (auto* ex = std::get_if<DialogExample>(&outcomes[i])) {
      result.examples.push_back(std::move(*ex));
    } else if (auto* err = std::get_if<std::string>(&outcomes[i])) {
      result.failures.push_back({seeds[i].image_id, std::move(*err)});
    }
  }
  return result;
}

std::string format_failures(std::span<const AugmentFailure> failures) {
  auto list = nlohmann::ordered_json::array();
  for (const auto& f : failures) {
    list.push_back({{"image_id", f.image_id}, {"error", f.error}});
  }
  return nlohmann::ordered_json{{"failures", std::move(list)}}.dump(1) + "\n";
}

}  // namespace chatir
