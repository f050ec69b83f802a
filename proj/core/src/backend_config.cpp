// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include "chatir/backend_config.hpp"

#include <cstdlib>

#include <json.hpp>

#include "chatir/error.hpp"
#include "chatir/prompts.hpp"
#include "chatir/remote.hpp"

namespace chatir {

using nlohmann::json;

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

EndpointConfig parse_endpoint(const json& j, std::string default_path,
                              std::string default_url,
                              std::string default_token_env) {
  EndpointConfig e;
  e.base_url = j.value("base_url", std::move(default_url));
  e.path = j.value("path", std::move(default_path));
  e.token_env = j.value("token_env", std::move(default_token_env));
  e.timeout = std::chrono::milliseconds(j.value("timeout_ms", 30000));
  e.retry.max_retries = j.value("max_retries", 2);
  e.retry.initial_backoff = std::chrono::milliseconds(j.value("backoff_ms", 100));
  e.retry.backoff_multiplier = j.value("backoff_multiplier", 2.0);
  e.max_in_flight = j.value("max_in_flight", std::size_t{4});
  if (e.base_url.empty()) {
    throw ParseError("remote backend endpoint is missing base_url");
  }
  return e;
}

Dialog parse_dialog(const json& j) {
  std::vector<Round> rounds;
  for (const auto& r : j.value("rounds", json::array())) {
    rounds.push_back({r.at("q").get<std::string>(), r.at("a").get<std::string>()});
  }
  return Dialog(j.at("caption").get<std::string>(), std::move(rounds));
}

std::shared_ptr<CompletionBackend> make_llm(const json& j) {
  const auto& endpoint = j.contains("endpoint") ? j.at("endpoint") : json::object();
  return std::make_shared<ChatCompletionClient>(
      parse_endpoint(endpoint, "/v1/chat/completions",
                     env_or("CHATIR_LLM_URL", ""), "CHATIR_LLM_TOKEN"),
      j.value("model", std::string("gpt-3.5-turbo")), j.value("max_tokens", 64));
}

std::shared_ptr<Embedder> make_embedder(const json& j,
                                        const BackendContext& ctx) {
  const auto kind = j.value("kind", std::string("stub"));
  const std::size_t dim = j.value("dim", ctx.embedding_dim);
  if (dim == 0) throw ParseError("embedder dimension is unknown");
  if (kind == "stub") {
    return std::make_shared<HashingEmbedder>(dim, j.value("seed", std::uint64_t{0}));
  }
  if (kind == "remote") {
    return std::make_shared<RemoteEmbedder>(
        parse_endpoint(j.value("endpoint", json::object()), "/embed", "", ""),
        dim);
  }
  throw ParseError("unknown embedder kind '" + kind + "'");
}

std::shared_ptr<Questioner> make_questioner(const json& j,
                                            const BackendContext& ctx) {
  const auto kind = j.value("kind", std::string("template"));
  if (kind == "template") {
    if (j.contains("questions")) {
      return std::make_shared<TemplateQuestioner>(
          j.at("questions").get<std::vector<std::string>>());
    }
    if (!ctx.attributes) return nullptr;
    return std::make_shared<TemplateQuestioner>(
        attribute_questions(ctx.attributes->attributes()));
  }
  if (kind == "recorded") {
    std::vector<Dialog> stored;
    stored.reserve(ctx.recorded.size());
    for (const auto& [id, d] : ctx.recorded) stored.push_back(d);
    return std::make_shared<RecordedQuestioner>(std::move(stored));
  }
  if (kind == "fewshot") {
    std::vector<PromptShot> shots;
    if (j.contains("shots")) {
      for (const auto& s : j.at("shots")) {
        shots.push_back({parse_dialog(s), s.at("next_question").get<std::string>()});
      }
    } else {
      shots = default_prompt_shots();
    }
    return std::make_shared<FewShotQuestioner>(make_llm(j), std::move(shots));
  }
  if (kind == "unanswered") {
    return std::make_shared<UnansweredQuestioner>(make_llm(j));
  }
  throw ParseError("unknown questioner kind '" + kind + "'");
}

std::shared_ptr<Answerer> make_answerer(const json& j,
                                        const BackendContext& ctx) {
  const auto kind = j.value("kind", std::string("oracle"));
  if (kind == "oracle") {
    if (!ctx.attributes) return nullptr;
    return std::make_shared<OracleAnswerer>(ctx.attributes);
  }
  if (kind == "recorded") {
    return std::make_shared<RecordedAnswerer>(ctx.recorded);
  }
  if (kind == "vqa") {
    return std::make_shared<VqaAnswerer>(
        parse_endpoint(j.value("endpoint", json::object()), "/vqa",
                       env_or("CHATIR_VQA_URL", ""), ""),
        ctx.image_urls);
  }
  throw ParseError("unknown answerer kind '" + kind + "'");
}

}  // namespace

Backends make_backends(std::string_view json_config,
                       const BackendContext& context) {
  try {
    const json j = json_config.empty() ? json::object() : json::parse(json_config);
    Backends b;
    b.embedder = make_embedder(j.value("embedder", json::object()), context);
    b.questioner = make_questioner(j.value("questioner", json::object()), context);
    b.answerer = make_answerer(j.value("answerer", json::object()), context);
    return b;
  } catch (const json::exception& e) {
    throw ParseError(std::string("backend configuration: ") + e.what());
  }
}

}  // namespace chatir
