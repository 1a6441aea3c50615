#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mimic/core/binary.hpp"
#include "mimic/core/file_io.hpp"
#include "mimic/features/embedding.hpp"

namespace mimic {

// Layout: magic "MIMEMB1\0", u32 count, u32 dim, u8 modality (0 text, 1 image),
// then count*dim little-endian float32 values, row-major.
inline constexpr std::string_view kEmbeddingMagic{"MIMEMB1\0", 8};

struct EmbeddingFile {
  Modality modality = Modality::text;
  std::uint32_t dim = 0;
  std::vector<std::vector<float>> rows;

  friend bool operator==(const EmbeddingFile&, const EmbeddingFile&) = default;
};

inline std::string encode_embedding_file(const EmbeddingFile& file) {
  if (file.modality == Modality::pooled) throw InvalidArgument("embedding files store text or image rows only");
  ByteWriter w;
  w.put_bytes(kEmbeddingMagic);
  w.put(std::uint32_t(file.rows.size()));
  w.put(file.dim);
  w.put(std::uint8_t(file.modality));
  for (const auto& row : file.rows) {
    if (row.size() != file.dim) throw InvalidArgument("embedding row width does not match dim");
    for (float x : row) {
      if (!std::isfinite(x)) throw InvalidArgument("embedding contains a non-finite value");
      w.put(x);
    }
  }
  return std::move(w).bytes();
}

/// Parses an embedding file; `name` is used in error messages.
inline EmbeddingFile decode_embedding_file(std::string_view bytes, const std::string& name) {
  ByteReader r(bytes, "embedding file '" + name + "'");
  if (r.remaining() < kEmbeddingMagic.size() || r.get_bytes(kEmbeddingMagic.size()) != kEmbeddingMagic)
    r.fail("bad magic (expected MIMEMB1)");
  EmbeddingFile out;
  const auto count = r.get<std::uint32_t>();
  out.dim = r.get<std::uint32_t>();
  const auto code = r.get<std::uint8_t>();
  if (code > 1) r.fail("unknown modality code " + std::to_string(code));
  out.modality = Modality(code);
  if (out.dim == 0 && count > 0) r.fail("zero dimension");
  if (r.remaining() != std::uint64_t(count) * out.dim * sizeof(float))
    r.fail("payload size does not match count*dim");
  out.rows.assign(count, std::vector<float>(out.dim));
  for (auto& row : out.rows)
    for (auto& x : row) {
      x = r.get<float>();
      if (!std::isfinite(x)) r.fail("non-finite value in payload");
    }
  return out;
}

inline EmbeddingFile read_embedding_file(const std::filesystem::path& path) {
  return decode_embedding_file(read_file(path), path.string());
}

inline void write_embedding_file(const std::filesystem::path& path, const EmbeddingFile& file) {
  write_file_atomic(path, encode_embedding_file(file));
}

inline std::vector<Embedding> to_embeddings(const EmbeddingFile& file) {
  std::vector<Embedding> out;
  out.reserve(file.rows.size());
  for (const auto& row : file.rows) out.push_back(Embedding{std::vector<double>(row.begin(), row.end()), file.modality, {}});
  return out;
}

}  // namespace mimic
