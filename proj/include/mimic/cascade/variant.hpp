#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace mimic {

/// Feature-set variants of the ablation, in report order.
enum class Variant {
  N,            ///< numeric only
  N_T_Em,       ///< numeric + text embedding
  N_T_P,        ///< numeric + text-classifier probability
  N_T_Em_I_Em,  ///< numeric + text and image embeddings
  N_T_P_I_P,    ///< numeric + text and image classifier probabilities
};

inline constexpr std::array<Variant, 5> kAllVariants = {Variant::N, Variant::N_T_Em, Variant::N_T_P,
                                                        Variant::N_T_Em_I_Em, Variant::N_T_P_I_P};

inline std::string_view variant_id(Variant v) {
  switch (v) {
    case Variant::N: return "N";
    case Variant::N_T_Em: return "N_T_Em";
    case Variant::N_T_P: return "N_T_P";
    case Variant::N_T_Em_I_Em: return "N_T_Em_I_Em";
    case Variant::N_T_P_I_P: return "N_T_P_I_P";
  }
  return "?";
}

/// Label used in the report's Model column.
inline std::string_view variant_model_name(Variant v) {
  switch (v) {
    case Variant::N: return "DL-1";
    case Variant::N_T_Em: return "DL-2";
    case Variant::N_T_P: return "DL-3";
    case Variant::N_T_Em_I_Em: return "DL-4";
    case Variant::N_T_P_I_P: return "DL-5";
  }
  return "?";
}

inline std::string_view variant_modalities(Variant v) {
  switch (v) {
    case Variant::N: return "N";
    case Variant::N_T_Em: return "N+T(Em)";
    case Variant::N_T_P: return "N+T(P)";
    case Variant::N_T_Em_I_Em: return "N+T(Em)+I(Em)";
    case Variant::N_T_P_I_P: return "N+T(P)+I(P)";
  }
  return "?";
}

/// Accepts the identifier ("N_T_P"), the modality label ("N+T(P)") or the
/// model name ("DL-3").
inline std::optional<Variant> parse_variant(std::string_view s) {
  for (auto v : kAllVariants)
    if (s == variant_id(v) || s == variant_modalities(v) || s == variant_model_name(v)) return v;
  return std::nullopt;
}

inline bool uses_text_embedding(Variant v) { return v == Variant::N_T_Em || v == Variant::N_T_Em_I_Em; }
inline bool uses_image_embedding(Variant v) { return v == Variant::N_T_Em_I_Em; }
inline bool uses_text_probability(Variant v) { return v == Variant::N_T_P || v == Variant::N_T_P_I_P; }
inline bool uses_image_probability(Variant v) { return v == Variant::N_T_P_I_P; }
inline bool needs_stage1(Variant v) { return uses_text_probability(v) || uses_image_probability(v); }

}  // namespace mimic
