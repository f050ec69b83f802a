// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include "chatir/remote.hpp"

#include <cstdlib>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "chatir/error.hpp"

namespace chatir {

using nlohmann::json;

struct HttpJsonClient::Gate {
  explicit Gate(std::size_t n)
      : slots(static_cast<std::ptrdiff_t>(std::max<std::size_t>(n, 1))) {}
  std::counting_semaphore<4096> slots;
};

namespace {

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<4096>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<4096>& s_;
};

bool retryable(int status) {
  return status == 0 || status == 408 || status == 429 || status >= 500;
}

json parse_body(const std::string& body, const std::string& where) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw TransportError(where + ": malformed JSON response: " + e.what(), 200,
                         0);
  }
}

}  // namespace

HttpJsonClient::HttpJsonClient(EndpointConfig config)
    : config_(std::move(config)),
      gate_(std::make_unique<Gate>(config_.max_in_flight)) {
  if (config_.base_url.empty()) {
    throw std::invalid_argument("remote endpoint needs a base URL");
  }
  if (config_.retry.max_retries < 0) {
    throw std::invalid_argument("retry budget must be >= 0");
  }
}

HttpJsonClient::~HttpJsonClient() = default;

std::string HttpJsonClient::post(const std::string& json_body) {
  SlotGuard slot(gate_->slots);

  httplib::Headers headers;
  if (!config_.token_env.empty()) {
    if (const char* token = std::getenv(config_.token_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }

  httplib::Client client(config_.base_url);
  const auto timeout = config_.timeout;
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  const std::string target = config_.base_url + config_.path;
  auto backoff = config_.retry.initial_backoff;
  int attempt = 0;
  while (true) {
    auto res = client.Post(config_.path, headers, json_body,
                           "application/json");
    const int status = res ? res->status : 0;
    if (res && status >= 200 && status < 300) return res->body;

    std::string why = res ? "HTTP " + std::to_string(status)
                          : "connection error: " + httplib::to_string(res.error());
    if (!retryable(status) || attempt >= config_.retry.max_retries) {
      throw TransportError("POST " + target + " failed after " +
                               std::to_string(attempt) + " retries: " + why,
                           status, attempt);
    }
    ++attempt;
    retries_.fetch_add(1, std::memory_order_relaxed);
    std::this_thread::sleep_for(backoff);
    backoff = std::chrono::milliseconds(static_cast<long long>(
        static_cast<double>(backoff.count()) *
        config_.retry.backoff_multiplier));
  }
}

ChatCompletionClient::ChatCompletionClient(EndpointConfig endpoint,
                                           std::string model, int max_tokens)
    : http_(std::move(endpoint)),
      model_(std::move(model)),
      max_tokens_(max_tokens) {}

std::string ChatCompletionClient::complete(const std::string& prompt) {
  const json body = {
      {"model", model_},
      {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
      {"max_tokens", max_tokens_}};
  const auto reply = parse_body(http_.post(body.dump()), "chat completion");
  try {
    const auto& choice = reply.at("choices").at(0);
    if (choice.contains("message")) {
      return choice.at("message").at("content").get<std::string>();
    }
    return choice.at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(
        std::string("chat completion: unexpected response shape: ") + e.what(),
        200, 0);
  }
}

VqaAnswerer::VqaAnswerer(EndpointConfig endpoint,
                         std::unordered_map<std::string, std::string> image_urls)
    : http_(std::move(endpoint)), image_urls_(std::move(image_urls)) {}

std::string VqaAnswerer::answer(std::string_view question,
                                std::string_view target_id,
                                const Dialog& /*history*/) {
  const auto it = image_urls_.find(std::string(target_id));
  const std::string image =
      it != image_urls_.end() ? it->second : std::string(target_id);
  const json body = {{"image", image}, {"question", std::string(question)}};
  const auto reply = parse_body(http_.post(body.dump()), "vqa");
  try {
    auto text = reply.at("answer").get<std::string>();
    if (trim(text).empty()) throw TransportError("vqa: empty answer", 200, 0);
    return text;
  } catch (const json::exception& e) {
    throw TransportError(std::string("vqa: unexpected response shape: ") +
                             e.what(),
                         200, 0);
  }
}

RemoteEmbedder::RemoteEmbedder(EndpointConfig endpoint, std::size_t dim)
    : http_(std::move(endpoint)), dim_(dim) {}

std::vector<float> RemoteEmbedder::embed(const SerializedQuery& query) {
  const json body = {{"text", query.text}};
  const auto reply = parse_body(http_.post(body.dump()), "embed");
  std::vector<float> v;
  try {
    v = reply.at("embedding").get<std::vector<float>>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("embed: unexpected response shape: ") +
                             e.what(),
                         200, 0);
  }
  if (v.size() != dim_) {
    throw TransportError("embed: got " + std::to_string(v.size()) +
                             " values, expected " + std::to_string(dim_),
                         200, 0);
  }
  return v;
}

}  // namespace chatir
