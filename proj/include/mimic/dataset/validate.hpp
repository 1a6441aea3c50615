#pragma once

#include <string>
#include <vector>

#include "mimic/dataset/manifest.hpp"
#include "mimic/features/embedding_io.hpp"

namespace mimic {

struct ValidationReport {
  std::size_t instances = 0;
  std::size_t companies = 0;
  std::size_t missing_text = 0;
  std::size_t missing_images = 0;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  [[nodiscard]] bool clean() const { return errors.empty(); }
};

/// Instance-level checks beyond what load_manifest enforces: referenced
/// embedding files decode and agree on dimension per modality, and call
/// dates lie inside the company's price history.
inline ValidationReport validate_dataset(const DatasetManifest& m) {
  ValidationReport rep;
  rep.instances = m.instances.size();
  rep.companies = m.companies.size();
  std::optional<std::uint32_t> dims[2];

  auto check_file = [&](const EarningsInstance& inst, const std::string& ref, Modality expected) {
    try {
      const auto file = read_embedding_file(m.resolve(ref));
      if (file.modality != expected)
        rep.errors.push_back(inst.key() + ": embedding file '" + ref + "' has modality " + to_string(file.modality) +
                             ", expected " + to_string(expected));
      if (file.rows.empty()) rep.errors.push_back(inst.key() + ": embedding file '" + ref + "' has no rows");
      auto& d = dims[std::size_t(expected)];
      if (!d) d = file.dim;
      if (*d != file.dim)
        rep.errors.push_back(inst.key() + ": embedding file '" + ref + "' has dim " + std::to_string(file.dim) +
                             ", other " + to_string(expected) + " files have " + std::to_string(*d));
    } catch (const Error& e) {
      rep.errors.push_back(inst.key() + ": " + e.what());
    }
  };

  for (const auto& inst : m.instances) {
    if (inst.text_embedding_ref)
      check_file(inst, *inst.text_embedding_ref, Modality::text);
    else
      ++rep.missing_text;
    if (inst.image_embedding_refs.empty()) ++rep.missing_images;
    for (const auto& ref : inst.image_embedding_refs) check_file(inst, ref, Modality::image);

    const Company* c = m.find_company(inst.company_id);
    if (c && !c->prices.empty()) {
      if (inst.call_date >= c->prices.back().date)
        rep.warnings.push_back(inst.key() + ": call date is not before the last price bar (" +
                               c->prices.back().date.iso() + "); possible lookahead or stale price data");
      if (inst.call_date < c->prices.front().date)
        rep.warnings.push_back(inst.key() + ": call date precedes the company's price history");
    }
  }
  return rep;
}

}  // namespace mimic
