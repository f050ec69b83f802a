// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>

#include "chatir/attribute_table.hpp"
#include "chatir/backends.hpp"
#include "chatir/dialog.hpp"

namespace chatir {

// Data a backend may need at construction time.
struct BackendContext {
  std::shared_ptr<const AttributeTable> attributes;
  // Recorded human dialogs by image id.
  std::unordered_map<std::string, Dialog> recorded;
  std::unordered_map<std::string, std::string> image_urls;
  // Default stub embedder dimension (usually the corpus dimension).
  std::size_t embedding_dim = 0;
};

struct Backends {
  std::shared_ptr<Embedder> embedder;
  std::shared_ptr<Questioner> questioner;  // null if not configurable
  std::shared_ptr<Answerer> answerer;      // null if not configurable
};

// Builds backends from a JSON document:
//   {"embedder":   {"kind": "stub"|"remote", ...},
//    "questioner": {"kind": "template"|"recorded"|"fewshot"|"unanswered"},
//    "answerer":   {"kind": "oracle"|"recorded"|"vqa", ...}}
// Missing sections fall back to stubs where the context allows. Remote
// endpoints read CHATIR_LLM_TOKEN / CHATIR_VQA_URL when not set explicitly.
// Throws ParseError on malformed configuration.
Backends make_backends(std::string_view json_config,
                       const BackendContext& context);

}  // namespace chatir
