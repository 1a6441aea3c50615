#pragma once

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "mimic/core/file_io.hpp"
#include "mimic/dataset/types.hpp"
#include "mimic/features/numeric.hpp"

namespace mimic {

/// Two instances share a (company_id, call_date) key.
class DuplicateKeyError : public DataError {
 public:
  using DataError::DataError;
};

namespace detail {

using nlohmann::json;

inline const json& require(const json& obj, const char* field, const std::string& where) {
  if (!obj.is_object()) throw DataError(where + ": expected an object");
  const auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) throw DataError(where + ": missing field '" + field + "'");
  return *it;
}

template <typename T>
T get_as(const json& obj, const char* field, const std::string& where) {
  try {
    return require(obj, field, where).get<T>();
  } catch (const json::type_error&) {
    throw DataError(where + ": field '" + field + "' has the wrong type");
  }
}

template <typename T>
std::optional<T> get_opt(const json& obj, const char* field, const std::string& where) {
  const auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::type_error&) {
    throw DataError(where + ": field '" + field + "' has the wrong type");
  }
}

inline Date get_date(const json& obj, const char* field, const std::string& where) {
  try {
    return Date::parse(get_as<std::string>(obj, field, where));
  } catch (const DataError& e) {
    throw DataError(where + ": " + e.what());
  }
}

inline void check_bars(const std::vector<PriceBar>& bars, const std::string& where) {
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const auto& b = bars[i];
    if (!(b.open > 0) || !(b.close > 0))
      throw DataError(where + ": non-positive price on " + b.date.iso());
    if (!(b.volume >= 0) || !std::isfinite(b.volume))
      throw DataError(where + ": invalid volume on " + b.date.iso());
    if (i > 0 && !(bars[i - 1].date < b.date))
      throw DataError(where + ": bar dates not strictly increasing at " + b.date.iso());
  }
}

inline std::vector<PriceBar> parse_bars(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw DataError(where + ": expected an array of price bars");
  std::vector<PriceBar> out;
  out.reserve(arr.size());
  for (const auto& j : arr) {
    out.push_back({get_date(j, "date", where), get_as<double>(j, "open", where), get_as<double>(j, "close", where),
                   get_as<double>(j, "volume", where)});
  }
  check_bars(out, where);
  return out;
}

/// CSV with header `date,open,close,volume`.
inline std::vector<PriceBar> parse_price_csv(const std::string& text, const std::string& where) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError(where + ": empty price file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "date,open,close,volume") throw DataError(where + ": expected header 'date,open,close,volume'");
  std::vector<PriceBar> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string date, open, close, volume;
    if (!std::getline(fields, date, ',') || !std::getline(fields, open, ',') || !std::getline(fields, close, ',') ||
        !std::getline(fields, volume))
      throw DataError(where + ":" + std::to_string(lineno) + ": expected 4 fields");
    try {
      out.push_back({Date::parse(date), std::stod(open), std::stod(close), std::stod(volume)});
    } catch (const std::exception& e) {
      throw DataError(where + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  check_bars(out, where);
  return out;
}

inline std::string format_price_csv(const std::vector<PriceBar>& bars) {
  std::string out = "date,open,close,volume\n";
  char buf[128];
  for (const auto& b : bars) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g\n", b.date.iso().c_str(), b.open, b.close, b.volume);
    out += buf;
  }
  return out;
}

inline std::vector<DatedValue> parse_series(const json& parent, const char* field, const std::string& where) {
  std::vector<DatedValue> out;
  const auto it = parent.find(field);
  if (it == parent.end() || it->is_null()) return out;
  const std::string w = where + "." + field;
  if (!it->is_array()) throw DataError(w + ": expected an array");
  for (const auto& j : *it) out.push_back({get_date(j, "date", w), get_as<double>(j, "value", w)});
  for (std::size_t i = 1; i < out.size(); ++i)
    if (!(out[i - 1].date < out[i].date)) throw DataError(w + ": dates not strictly increasing");
  return out;
}

inline NumericFeatureVector parse_numeric(const json& j, const std::string& where) {
  if (!j.is_object()) throw DataError(where + ".numeric: expected an object");
  NumericFeatureVector v;
  for (const auto& [name, value] : j.items()) {
    const auto idx = numeric_column_index(name);
    if (!idx) throw DataError(where + ".numeric: unknown feature '" + name + "'");
    if (value.is_null()) continue;
    if (!value.is_number()) throw DataError(where + ".numeric." + name + ": expected a number or null");
    v.at(*idx) = value.get<double>();
  }
  return v;
}

inline json bars_to_json(const std::vector<PriceBar>& bars) {
  json arr = json::array();
  for (const auto& b : bars)
    arr.push_back({{"date", b.date.iso()}, {"open", b.open}, {"close", b.close}, {"volume", b.volume}});
  return arr;
}

inline json series_to_json(const std::vector<DatedValue>& s) {
  json arr = json::array();
  for (const auto& o : s) arr.push_back({{"date", o.date.iso()}, {"value", o.value}});
  return arr;
}

}  // namespace detail

/// Throws DataError when `v` is not a valid price.
inline void require_price(double v, const char* what) {
  if (!(v > 0) || !std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be a positive finite price");
}

/// 1 when the next-day open strictly exceeds the call-day open, else 0.
inline int direction_label(double open_d, double open_d1) {
  require_price(open_d, "open_d");
  require_price(open_d1, "open_d1");
  return open_d1 > open_d ? 1 : 0;
}

/// Parses and validates a manifest document. Relative file references are
/// resolved against `root`; referenced text and price files are loaded.
/// Instances without an explicit `numeric` object get it assembled from
/// the company and market context.
inline DatasetManifest parse_manifest(const nlohmann::json& doc, const std::filesystem::path& root) {
  using namespace detail;
  DatasetManifest m;
  m.root = root;
  m.version = get_opt<std::string>(doc, "version", "manifest").value_or("");

  const auto& companies = require(doc, "companies", "manifest");
  if (!companies.is_array()) throw DataError("manifest: 'companies' must be an array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < companies.size(); ++i) {
    const auto& j = companies[i];
    const std::string where = "companies[" + std::to_string(i) + "]";
    Company c;
    c.company_id = get_as<std::string>(j, "company_id", where);
    c.name = get_opt<std::string>(j, "name", where).value_or("");
    const std::string cw = where + " (" + c.company_id + ")";
    if (c.company_id.empty()) throw DataError(where + ": empty company_id");
    if (!ids.insert(c.company_id).second) throw DuplicateKeyError(cw + ": duplicate company_id");
    c.prices_file = get_opt<std::string>(j, "prices_file", cw);
    if (c.prices_file) {
      c.prices = parse_price_csv(read_file(m.resolve(*c.prices_file)), *c.prices_file);
    } else if (j.contains("prices")) {
      c.prices = parse_bars(j["prices"], cw + ".prices");
    }
    if (const auto it = j.find("fundamentals"); it != j.end() && !it->is_null()) {
      for (const auto& fj : *it) {
        FundamentalsRecord r;
        r.fiscal_year = get_as<int>(fj, "fiscal_year", cw + ".fundamentals");
        r.period_end = get_date(fj, "period_end", cw + ".fundamentals");
        for (const auto& [name, value] : require(fj, "values", cw + ".fundamentals").items()) {
          const auto idx = numeric_column_index(name);
          if (!idx || !is_fundamental(*idx))
            throw DataError(cw + ".fundamentals: '" + name + "' is not a fundamental indicator");
          if (value.is_null()) continue;
          if (!value.is_number()) throw DataError(cw + ".fundamentals." + name + ": expected a number");
          r.values.emplace(name, value.get<double>());
        }
        c.fundamentals.push_back(std::move(r));
      }
    }
    m.companies.push_back(std::move(c));
  }

  if (const auto it = doc.find("market"); it != doc.end() && !it->is_null()) {
    if (it->contains("nifty")) m.market.nifty = parse_bars((*it)["nifty"], "market.nifty");
    m.market.gdp_growth = parse_series(*it, "gdp_growth", "market");
    m.market.inflation_rate = parse_series(*it, "inflation_rate", "market");
  }

  const auto& instances = require(doc, "instances", "manifest");
  if (!instances.is_array()) throw DataError("manifest: 'instances' must be an array");
  std::set<std::string> keys;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& j = instances[i];
    std::string where = "instances[" + std::to_string(i) + "]";
    EarningsInstance inst;
    inst.company_id = get_as<std::string>(j, "company_id", where);
    inst.call_date = get_date(j, "call_date", where);
    where += " (" + inst.key() + ")";

    const Company* company = m.find_company(inst.company_id);
    if (!company) throw DataError(where + ": company_id not listed in companies");
    if (!keys.insert(inst.key()).second) throw DuplicateKeyError(where + ": duplicate (company_id, call_date)");

    inst.transcript_file = get_opt<std::string>(j, "transcript_file", where);
    inst.transcript_text = get_opt<std::string>(j, "transcript_text", where);
    if (inst.transcript_file) inst.transcript_text = read_file(m.resolve(*inst.transcript_file));
    inst.table_markdown_file = get_opt<std::string>(j, "table_markdown_file", where);
    inst.table_markdown = get_opt<std::string>(j, "table_markdown", where);
    if (inst.table_markdown_file) inst.table_markdown = read_file(m.resolve(*inst.table_markdown_file));
    inst.text_embedding_ref = get_opt<std::string>(j, "text_embedding_ref", where);
    inst.image_embedding_refs =
        get_opt<std::vector<std::string>>(j, "image_embedding_refs", where).value_or(std::vector<std::string>{});
    inst.image_files = get_opt<std::vector<std::string>>(j, "image_files", where).value_or(std::vector<std::string>{});
    inst.open_d = get_as<double>(j, "open_d", where);
    inst.open_d1 = get_as<double>(j, "open_d1", where);
    if (!(inst.open_d > 0) || !std::isfinite(inst.open_d)) throw DataError(where + ": open_d must be positive");
    if (!(inst.open_d1 > 0) || !std::isfinite(inst.open_d1)) throw DataError(where + ": open_d1 must be positive");

    const bool has_transcript = inst.transcript_text && !inst.transcript_text->empty();
    if (!has_transcript && inst.image_embedding_refs.empty())
      throw DataError(where + ": needs a transcript or presentation images");

    if (const auto nj = j.find("numeric"); nj != j.end() && !nj->is_null()) {
      inst.numeric = parse_numeric(*nj, where);
    } else {
      try {
        inst.numeric = assemble_numeric(inst, *company, m.market);
      } catch (const DataError& e) {
        throw DataError(where + ": " + e.what());
      }
    }
    m.instances.push_back(std::move(inst));
  }
  return m;
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("manifest '" + path.string() + "': " + e.what());
  }
  return parse_manifest(doc, path.parent_path());
}

/// Serializes a manifest. File references are written verbatim, so the
/// output is only loadable from the same root directory. The assembled
/// numeric vector is always written out.
inline nlohmann::json manifest_to_json(const DatasetManifest& m) {
  using nlohmann::json;
  json doc;
  doc["version"] = m.version;
  json companies = json::array();
  for (const auto& c : m.companies) {
    json j{{"company_id", c.company_id}, {"name", c.name}};
    if (c.prices_file)
      j["prices_file"] = *c.prices_file;
    else
      j["prices"] = detail::bars_to_json(c.prices);
    json funds = json::array();
    for (const auto& f : c.fundamentals)
      funds.push_back({{"fiscal_year", f.fiscal_year}, {"period_end", f.period_end.iso()}, {"values", f.values}});
    j["fundamentals"] = std::move(funds);
    companies.push_back(std::move(j));
  }
  doc["companies"] = std::move(companies);
  doc["market"] = {{"nifty", detail::bars_to_json(m.market.nifty)},
                   {"gdp_growth", detail::series_to_json(m.market.gdp_growth)},
                   {"inflation_rate", detail::series_to_json(m.market.inflation_rate)}};
  json instances = json::array();
  for (const auto& inst : m.instances) {
    json j{{"company_id", inst.company_id}, {"call_date", inst.call_date.iso()}};
    if (inst.transcript_file)
      j["transcript_file"] = *inst.transcript_file;
    else if (inst.transcript_text)
      j["transcript_text"] = *inst.transcript_text;
    if (inst.table_markdown_file)
      j["table_markdown_file"] = *inst.table_markdown_file;
    else if (inst.table_markdown)
      j["table_markdown"] = *inst.table_markdown;
    if (inst.text_embedding_ref) j["text_embedding_ref"] = *inst.text_embedding_ref;
    j["image_embedding_refs"] = inst.image_embedding_refs;
    if (!inst.image_files.empty()) j["image_files"] = inst.image_files;
    json numeric = json::object();
    for (std::size_t c = 0; c < kNumericWidth; ++c) {
      const auto& v = inst.numeric.at(c);
      numeric[std::string(kNumericColumnNames[c])] = v ? json(*v) : json(nullptr);
    }
    j["numeric"] = std::move(numeric);
    j["open_d"] = inst.open_d;
    j["open_d1"] = inst.open_d1;
    instances.push_back(std::move(j));
  }
  doc["instances"] = std::move(instances);
  return doc;
}

inline void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  write_file_atomic(path, manifest_to_json(m).dump(1) + "\n");
}

/// Date-based partition: call_date <= train_end -> train,
/// (train_end, val_end] -> val, later -> test. Input order is preserved.
inline SplitResult temporal_split(const std::vector<EarningsInstance>& instances, const SplitSpec& spec) {
  if (!(spec.train_end < spec.val_end)) throw InvalidArgument("temporal_split: train_end must precede val_end");
  SplitResult out;
  for (const auto& inst : instances) {
    if (inst.call_date <= spec.train_end)
      out.train.push_back(inst);
    else if (inst.call_date <= spec.val_end)
      out.val.push_back(inst);
    else
      out.test.push_back(inst);
  }
  return out;
}

inline SplitResult temporal_split(const DatasetManifest& m, const SplitSpec& spec) {
  return temporal_split(m.instances, spec);
}

}  // namespace mimic
