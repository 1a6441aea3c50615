#pragma once

#include <cmath>
#include <regex>
#include <string>
#include <string_view>

#include "mimic/core/error.hpp"

namespace mimic {

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Extracts a price from a model response. Lenient mode takes the first
/// number in the text (thousands separators allowed); strict mode accepts
/// only a single number surrounded by whitespace.
inline double parse_price(std::string_view response, bool strict = false) {
  static const std::regex number(R"([-+]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?(?:[eE][-+]?\d+)?|[-+]?\.\d+(?:[eE][-+]?\d+)?)");
  const std::string text(response);
  std::smatch match;
  if (strict) {
    const auto b = text.find_first_not_of(" \t\r\n");
    const auto e = text.find_last_not_of(" \t\r\n");
    const std::string core = b == std::string::npos ? std::string() : text.substr(b, e - b + 1);
    if (!std::regex_match(core, match, number)) throw ParseError("strict parse: response is not a single number");
  } else if (!std::regex_search(text, match, number)) {
    throw ParseError("no number found in response");
  }
  std::string digits;
  for (char c : match.str())
    if (c != ',') digits += c;
  const double v = std::strtod(digits.c_str(), nullptr);
  if (!std::isfinite(v)) throw ParseError("parsed value is not finite");
  return v;
}

}  // namespace mimic
