// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <memory>
#include <string>
#include <unordered_map>

#include "chatir/backends.hpp"

namespace chatir {

struct RetryPolicy {
  int max_retries = 2;
  std::chrono::milliseconds initial_backoff{100};
  double backoff_multiplier = 2.0;
};

struct EndpointConfig {
  std::string base_url;  // scheme://host[:port]
  std::string path;
  // Environment variable holding a bearer token; empty for no auth.
  std::string token_env;
  std::chrono::milliseconds timeout{30000};
  RetryPolicy retry;
  std::size_t max_in_flight = 4;
};

// JSON-over-HTTP POST with bounded concurrency and retries. Connection
// failures, 408, 429 and 5xx are retried; other statuses fail at once.
class HttpJsonClient {
 public:
  explicit HttpJsonClient(EndpointConfig config);
  ~HttpJsonClient();
  HttpJsonClient(const HttpJsonClient&) = delete;
  HttpJsonClient& operator=(const HttpJsonClient&) = delete;

  // Returns the response body. Throws TransportError.
  std::string post(const std::string& json_body);

  const EndpointConfig& config() const noexcept { return config_; }
  // Retries spent by all calls so far.
  std::size_t total_retries() const noexcept { return retries_.load(); }

 private:
  struct Gate;
  EndpointConfig config_;
  std::unique_ptr<Gate> gate_;
  std::atomic<std::size_t> retries_{0};
};

// OpenAI-style chat completion: {model, messages:[{role, content}],
// max_tokens} -> choices[0].message.content (or choices[0].text).
class ChatCompletionClient final : public CompletionBackend {
 public:
  ChatCompletionClient(EndpointConfig endpoint, std::string model,
                       int max_tokens = 256);
  std::string complete(const std::string& prompt) override;
  const HttpJsonClient& http() const noexcept { return http_; }

 private:
  HttpJsonClient http_;
  std::string model_;
  int max_tokens_;
};

// POST {image, question} -> {answer}. The image field carries the target's
// URL from `image_urls` when present, otherwise the id itself.
class VqaAnswerer final : public Answerer {
 public:
  VqaAnswerer(EndpointConfig endpoint,
              std::unordered_map<std::string, std::string> image_urls = {});
  std::string answer(std::string_view question, std::string_view target_id,
                     const Dialog& history) override;
  const HttpJsonClient& http() const noexcept { return http_; }

 private:
  HttpJsonClient http_;
  std::unordered_map<std::string, std::string> image_urls_;
};

// POST {text} -> {embedding:[...]}; the vector is passed through.
class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(EndpointConfig endpoint, std::size_t dim);
  std::size_t dim() const override { return dim_; }
  std::vector<float> embed(const SerializedQuery& query) override;

 private:
  HttpJsonClient http_;
  std::size_t dim_;
};

}  // namespace chatir
