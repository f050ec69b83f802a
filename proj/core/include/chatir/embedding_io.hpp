// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace chatir {

class EmbeddingCorpus;

// Binary embedding file, little-endian:
//   "CIRE" | u32 version (1) | u32 dim | u64 rows | rows*dim float32
// Ids live in a companion UTF-8 text file, one per line.
inline constexpr char kEmbeddingMagic[4] = {'C', 'I', 'R', 'E'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;

struct EmbeddingMatrix {
  std::vector<float> values;  // row-major
  std::size_t dim = 0;
  std::size_t rows = 0;
};

// Throws ParseError on bad magic, unsupported version or truncation.
EmbeddingMatrix read_embedding_matrix(const std::filesystem::path& path);
void write_embedding_matrix(const std::filesystem::path& path,
                            std::span<const float> values, std::size_t dim);

std::vector<std::string> read_ids(const std::filesystem::path& path);
void write_ids(const std::filesystem::path& path,
               std::span<const std::string> ids);

// Reads both files and builds the corpus (normalizing rows).
EmbeddingCorpus load_corpus(const std::filesystem::path& embeddings,
                            const std::filesystem::path& ids);
void save_corpus(const EmbeddingCorpus& corpus,
                 const std::filesystem::path& embeddings,
                 const std::filesystem::path& ids);

// Optional thumbnail sidecar: "<id>\t<url>" per line.
std::unordered_map<std::string, std::string> read_thumbnails(
    const std::filesystem::path& path);

// Little-endian primitives shared with the checkpoint format.
void put_u32(std::string& out, std::uint32_t v);
void put_u64(std::string& out, std::uint64_t v);
void put_f32(std::string& out, float v);
std::uint32_t get_u32(const unsigned char* p);
std::uint64_t get_u64(const unsigned char* p);
float get_f32(const unsigned char* p);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace chatir
