#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mimic/core/date.hpp"
#include "mimic/features/numeric_schema.hpp"

namespace mimic {

struct PriceBar {
  Date date;
  double open = 0.0;
  double close = 0.0;
  double volume = 0.0;

  friend bool operator==(const PriceBar&, const PriceBar&) = default;
};

/// A dated scalar observation, e.g. a published GDP growth figure.
struct DatedValue {
  Date date;
  double value = 0.0;

  friend bool operator==(const DatedValue&, const DatedValue&) = default;
};

/// Annual fundamentals for one fiscal year; keys are fundamental column names.
struct FundamentalsRecord {
  int fiscal_year = 0;
  Date period_end;
  std::map<std::string, double> values;

  friend bool operator==(const FundamentalsRecord&, const FundamentalsRecord&) = default;
};

struct Company {
  std::string company_id;
  std::string name;
  std::optional<std::string> prices_file;  ///< CSV relative to the manifest; loaded into `prices`
  std::vector<PriceBar> prices;
  std::vector<FundamentalsRecord> fundamentals;

  friend bool operator==(const Company&, const Company&) = default;
};

/// Index-level market data and macro series shared by all companies.
struct MarketContext {
  std::vector<PriceBar> nifty;
  std::vector<DatedValue> gdp_growth;
  std::vector<DatedValue> inflation_rate;

  friend bool operator==(const MarketContext&, const MarketContext&) = default;
};

/// One earnings event: call on day d, prediction target is the open of d+1.
struct EarningsInstance {
  std::string company_id;
  Date call_date;
  std::optional<std::string> transcript_file;
  std::optional<std::string> transcript_text;
  std::optional<std::string> table_markdown_file;
  std::optional<std::string> table_markdown;
  std::optional<std::string> text_embedding_ref;
  std::vector<std::string> image_embedding_refs;
  std::vector<std::string> image_files;  ///< raw slide images, only used by the VLM baseline
  NumericFeatureVector numeric;
  double open_d = 0.0;
  double open_d1 = 0.0;

  [[nodiscard]] std::string key() const { return company_id + "@" + call_date.iso(); }
  [[nodiscard]] bool has_text_embedding() const { return text_embedding_ref.has_value(); }
  [[nodiscard]] bool has_image_embeddings() const { return !image_embedding_refs.empty(); }

  friend bool operator==(const EarningsInstance&, const EarningsInstance&) = default;
};

struct DatasetManifest {
  std::string version;
  std::vector<Company> companies;
  MarketContext market;
  std::vector<EarningsInstance> instances;
  std::filesystem::path root;  ///< directory that relative file references resolve against

  [[nodiscard]] const Company* find_company(const std::string& id) const {
    for (const auto& c : companies)
      if (c.company_id == id) return &c;
    return nullptr;
  }

  [[nodiscard]] std::filesystem::path resolve(const std::string& ref) const {
    const std::filesystem::path p(ref);
    return p.is_absolute() ? p : root / p;
  }

  friend bool operator==(const DatasetManifest& a, const DatasetManifest& b) {
    return a.version == b.version && a.companies == b.companies && a.market == b.market &&
           a.instances == b.instances;
  }
};

struct SplitSpec {
  Date train_end{2024, 2, 7};
  Date val_end{2024, 8, 9};
};

struct SplitResult {
  std::vector<EarningsInstance> train;
  std::vector<EarningsInstance> val;
  std::vector<EarningsInstance> test;
};

}  // namespace mimic
