#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mimic/core/error.hpp"

namespace mimic {

enum class Modality : std::uint8_t { text = 0, image = 1, pooled = 2 };

inline const char* to_string(Modality m) {
  switch (m) {
    case Modality::text: return "text";
    case Modality::image: return "image";
    case Modality::pooled: return "pooled";
  }
  return "?";
}

inline constexpr std::size_t kDefaultEmbeddingDim = 128;

struct Embedding {
  std::vector<double> values;
  Modality modality = Modality::text;
  std::optional<std::size_t> truncated_from;

  [[nodiscard]] std::size_t dim() const { return values.size(); }

  friend bool operator==(const Embedding&, const Embedding&) = default;
};

inline double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// Keeps the leading `k` components and rescales them to unit norm.
/// Throws DataError when the prefix is (numerically) zero.
inline Embedding truncate_matryoshka(const Embedding& e, std::size_t k = kDefaultEmbeddingDim) {
  if (k == 0 || k > e.dim())
    throw InvalidArgument("truncate_matryoshka: k=" + std::to_string(k) + " outside [1, " + std::to_string(e.dim()) + "]");
  const std::span<const double> prefix(e.values.data(), k);
  const double norm = l2_norm(prefix);
  if (!(norm >= 1e-12)) throw DataError("truncate_matryoshka: degenerate embedding prefix (norm < 1e-12)");
  Embedding out{std::vector<double>(k), e.modality, e.dim()};
  for (std::size_t i = 0; i < k; ++i) out.values[i] = prefix[i] / norm;
  return out;
}

/// Componentwise mean of same-dimension embeddings.
inline Embedding mean_pool(std::span<const Embedding> embs) {
  if (embs.empty()) throw InvalidArgument("mean_pool: empty embedding list");
  const std::size_t dim = embs.front().dim();
  Embedding out{std::vector<double>(dim, 0.0), Modality::pooled, std::nullopt};
  for (const auto& e : embs) {
    if (e.dim() != dim)
      throw DataError("mean_pool: dimension mismatch (" + std::to_string(e.dim()) + " vs " + std::to_string(dim) + ")");
    for (std::size_t i = 0; i < dim; ++i) out.values[i] += e.values[i];
  }
  for (auto& x : out.values) x /= double(embs.size());
  return out;
}

/// An embedding feature block: the embedding values followed by a
/// missing-indicator column.
struct ModalitySlot {
  Embedding embedding;
  bool missing = false;

  void append_to(std::vector<double>& row) const {
    row.insert(row.end(), embedding.values.begin(), embedding.values.end());
    row.push_back(missing ? 1.0 : 0.0);
  }
};

/// Zero embedding with the missing indicator set.
inline ModalitySlot encode_missing_modality(std::size_t dim, Modality modality = Modality::text) {
  if (dim == 0) throw InvalidArgument("encode_missing_modality: dim must be positive");
  return ModalitySlot{Embedding{std::vector<double>(dim, 0.0), modality, std::nullopt}, true};
}

}  // namespace mimic
