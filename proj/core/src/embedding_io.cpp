// Copyright 2026 The ChatIR Authors
// SPDX-License-Identifier: Apache-2.0

#include "chatir/embedding_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "chatir/dialog.hpp"
#include "chatir/error.hpp"
#include "chatir/index.hpp"

namespace chatir {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void put_f32(std::string& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

float get_f32(const unsigned char* p) {
  return std::bit_cast<float>(get_u32(p));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to " + path.string());
}

EmbeddingMatrix read_embedding_matrix(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  constexpr std::size_t kHeader = 4 + 4 + 4 + 8;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kEmbeddingMagic, 4) != 0) {
    throw ParseError(path.string() +
                     ": bad magic, expected \"CIRE\" embedding file");
  }
  if (bytes.size() < kHeader) {
    throw ParseError(path.string() + ": truncated header (" +
                     std::to_string(bytes.size()) + " bytes)");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t version = get_u32(p + 4);
  if (version != kEmbeddingVersion) {
    throw ParseError(path.string() + ": unsupported version " +
                     std::to_string(version));
  }
  EmbeddingMatrix m;
  m.dim = get_u32(p + 8);
  m.rows = get_u64(p + 12);
  if (m.dim == 0) throw ParseError(path.string() + ": zero dimension");
  const std::uint64_t count = static_cast<std::uint64_t>(m.rows) * m.dim;
  if (count > (bytes.size() - kHeader) / 4 ||
      bytes.size() - kHeader != count * 4) {
    throw ParseError(path.string() + ": payload size " +
                     std::to_string(bytes.size() - kHeader) +
                     " does not match header (" + std::to_string(m.rows) +
                     " x " + std::to_string(m.dim) + " float32)");
  }
  m.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    m.values[i] = get_f32(p + kHeader + 4 * i);
  }
  return m;
}

void write_embedding_matrix(const std::filesystem::path& path,
                            std::span<const float> values, std::size_t dim) {
  if (dim == 0 || values.size() % dim != 0) {
    throw std::invalid_argument("embedding values not a multiple of dim");
  }
  std::string out;
  out.reserve(20 + values.size() * 4);
  out.append(kEmbeddingMagic, 4);
  put_u32(out, kEmbeddingVersion);
  put_u32(out, static_cast<std::uint32_t>(dim));
  put_u64(out, values.size() / dim);
  for (const float v : values) put_f32(out, v);
  write_file(path, out);
}

std::vector<std::string> read_ids(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ids.push_back(line);
  }
  return ids;
}

void write_ids(const std::filesystem::path& path,
               std::span<const std::string> ids) {
  std::string out;
  for (const auto& id : ids) {
    out += id;
    out += '\n';
  }
  write_file(path, out);
}

EmbeddingCorpus load_corpus(const std::filesystem::path& embeddings,
                            const std::filesystem::path& ids_path) {
  auto matrix = read_embedding_matrix(embeddings);
  auto ids = read_ids(ids_path);
  if (ids.size() != matrix.rows) {
    throw IntegrityError(ids_path.string() + " lists " +
                         std::to_string(ids.size()) + " ids but " +
                         embeddings.string() + " holds " +
                         std::to_string(matrix.rows) + " rows");
  }
  return EmbeddingCorpus(std::move(ids), std::move(matrix.values), matrix.dim);
}

void save_corpus(const EmbeddingCorpus& corpus,
                 const std::filesystem::path& embeddings,
                 const std::filesystem::path& ids) {
  write_embedding_matrix(embeddings, corpus.data(), corpus.dim());
  write_ids(ids, corpus.ids());
}

std::unordered_map<std::string, std::string> read_thumbnails(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::unordered_map<std::string, std::string> urls;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected <id>\\t<url>");
    }
    urls[line.substr(0, tab)] = std::string(trim(line.substr(tab + 1)));
  }
  return urls;
}

}  // namespace chatir
