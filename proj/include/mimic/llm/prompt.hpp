#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mimic/dataset/types.hpp"

namespace mimic {

/// Zero-shot instruction placed at the start of every request.
inline constexpr std::string_view kAnalystInstruction =
    "You are an expert financial analyst. Using the earnings call transcript, images from the presentation slides, "
    "technical indicators, macroeconomic variables, market data, fundamental indicators, and the opening price on the "
    "earnings release day, estimate the opening stock price of the company on the day next to the day of the earnings "
    "call. Only provide the answer as a real number. No need for any justification.";

struct VlmRequest {
  std::string instance_id;
  std::string prompt_text;
  nlohmann::ordered_json numeric_json;
  std::vector<std::string> image_refs;
  std::string endpoint;
  std::string model_name;
  double timeout_seconds = 60.0;
};

/// Numeric features as a JSON object in schema order; missing values are null.
inline nlohmann::ordered_json numeric_payload(const NumericFeatureVector& numeric) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < kNumericWidth; ++c) {
    const auto& v = numeric.at(c);
    j[std::string(kNumericColumnNames[c])] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  }
  return j;
}

/// File-system-safe instance identifier, `<company>_<YYYY-MM-DD>`.
inline std::string instance_id(const EarningsInstance& inst) {
  std::string id = inst.company_id + "_" + inst.call_date.iso();
  for (auto& ch : id)
    if (ch == '/' || ch == '\\' || ch == ':' || ch == ' ') ch = '_';
  return id;
}

/// Fills the instruction template with the transcript and markdown tables,
/// the numeric features and the slide image list. Only call-day data is
/// used; the target price never enters the prompt.
inline VlmRequest build_prompt(const EarningsInstance& inst, const NumericFeatureVector& numeric) {
  VlmRequest req;
  req.instance_id = instance_id(inst);
  req.numeric_json = numeric_payload(numeric);
  req.image_refs = inst.image_files;

  std::string text = inst.transcript_text.value_or("");
  if (inst.table_markdown && !inst.table_markdown->empty()) {
    if (!text.empty()) text += "\n\n";
    text += *inst.table_markdown;
  }
  nlohmann::ordered_json images = inst.image_files;
  req.prompt_text = std::string(kAnalystInstruction);
  req.prompt_text += "\nInput Text: " + text;
  req.prompt_text += "\nInput Numeric: " + req.numeric_json.dump();
  req.prompt_text += "\nInput Images: " + images.dump();
  return req;
}

}  // namespace mimic
