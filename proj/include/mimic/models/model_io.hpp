#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "mimic/core/binary.hpp"
#include "json.hpp"

namespace mimic {

// Model file layout: 8-byte magic, u32 format version, u8 model kind,
// length-prefixed JSON config, u64 input width, then a kind-specific body.
inline constexpr std::string_view kModelMagic{"MIMMODL\0", 8};
inline constexpr std::uint32_t kModelFormatVersion = 1;

enum class ModelKind : std::uint8_t { gbt = 1, random_forest = 2, mlp = 3 };

inline void write_model_header(ByteWriter& w, ModelKind kind, const nlohmann::json& config, std::size_t width) {
  w.put_bytes(kModelMagic);
  w.put(kModelFormatVersion);
  w.put(std::uint8_t(kind));
  w.put_string(config.dump());
  w.put(std::uint64_t(width));
}

struct ModelHeader {
  ModelKind kind;
  nlohmann::json config;
  std::size_t width;
};

inline ModelHeader read_model_header(ByteReader& r, ModelKind expected) {
  if (r.remaining() < kModelMagic.size() || r.get_bytes(kModelMagic.size()) != kModelMagic) r.fail("bad model magic");
  if (const auto v = r.get<std::uint32_t>(); v != kModelFormatVersion)
    r.fail("unsupported model format version " + std::to_string(v));
  const auto kind = ModelKind(r.get<std::uint8_t>());
  if (kind != expected) r.fail("unexpected model kind " + std::to_string(int(kind)));
  ModelHeader h{kind, {}, 0};
  try {
    h.config = nlohmann::json::parse(r.get_string());
  } catch (const nlohmann::json::parse_error&) {
    r.fail("corrupt config block");
  }
  h.width = std::size_t(r.get<std::uint64_t>());
  return h;
}

/// Kind of a serialized model, without decoding the body.
inline ModelKind peek_model_kind(std::string_view bytes) {
  ByteReader r(bytes, "model");
  if (r.remaining() < kModelMagic.size() || r.get_bytes(kModelMagic.size()) != kModelMagic) r.fail("bad model magic");
  r.get<std::uint32_t>();
  return ModelKind(r.get<std::uint8_t>());
}

}  // namespace mimic
