#pragma once

#include <cstdio>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mimic/cascade/cascade.hpp"

namespace mimic {

struct VariantResult {
  Variant variant = Variant::N;
  MetricSet test;         ///< regression metrics on the test split
  std::optional<double> text_f1;
  std::optional<double> image_f1;
  std::size_t feature_width = 0;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  double l2 = 0.0;  ///< selected regressor L2 strength
  std::vector<std::string> evaluated_keys;  ///< test instances, in evaluation order
  std::vector<double> predictions;
};

struct ExperimentReport {
  nlohmann::json config;  ///< resolved configuration the run used
  std::size_t n_train = 0, n_val = 0, n_test = 0;
  std::optional<double> text_val_f1;
  std::optional<double> image_val_f1;
  std::vector<VariantResult> results;
};

/// Called after each variant is fit, e.g. to persist its models.
using VariantCallback = std::function<void(const CascadeFit&, const VariantResult&)>;

/// Fits and evaluates each requested variant on the same temporal split.
/// Stage-1 classifiers are fit once and shared by the probability variants.
inline ExperimentReport run_ablation(const DatasetManifest& manifest, const SplitSpec& split, const TrainConfig& cfg,
                                     std::span<const Variant> variants = kAllVariants, TargetAccessLog* log = nullptr,
                                     const VariantCallback& on_variant = {}) {
  const auto parts = temporal_split(manifest, split);
  if (parts.train.empty()) throw DataError("run_ablation: training split is empty");
  if (parts.test.empty()) throw DataError("run_ablation: test split is empty");
  const auto train = prepare_instances(manifest.root, parts.train, cfg.embedding_dim);
  const auto val = prepare_instances(manifest.root, parts.val, cfg.embedding_dim);
  const auto test = prepare_instances(manifest.root, parts.test, cfg.embedding_dim);

  ExperimentReport rep;
  rep.config = {{"train", cfg},
                {"split", {{"train_end", split.train_end.iso()}, {"val_end", split.val_end.iso()}}},
                {"manifest_version", manifest.version}};
  rep.n_train = train.size();
  rep.n_val = val.size();
  rep.n_test = test.size();

  bool want_text = false, want_image = false;
  for (auto v : variants) {
    want_text |= uses_text_probability(v);
    want_image |= uses_image_probability(v);
  }
  std::optional<Stage1Fit> stage1;
  if (want_text || want_image) {
    stage1 = fit_stage1(train, val, want_text, want_image, cfg, log);
    rep.text_val_f1 = stage1->text_val_f1;
    rep.image_val_f1 = stage1->image_val_f1;
  }

  for (const auto v : variants) {
    const CascadeFit fit = fit_cascade(train, val, v, cfg, log, stage1 ? &*stage1 : nullptr);
    VariantResult r;
    r.variant = v;
    r.text_f1 = fit.text_val_f1;
    r.image_f1 = fit.image_val_f1;
    r.feature_width = fit.model.schema.size();
    r.best_epoch = fit.model.regressor.best_epoch();
    r.epochs_run = fit.model.regressor.epochs_run();
    r.l2 = fit.model.regressor.params().l2;
    std::vector<double> targets;
    for (const auto& p : test) {
      r.predictions.push_back(predict(fit.model, p));
      targets.push_back(detail::read_target(p, TargetUse::evaluation, log));
      r.evaluated_keys.push_back(p.instance.key());
    }
    r.test = regression_metrics(r.predictions, targets);
    if (on_variant) on_variant(fit, r);
    rep.results.push_back(std::move(r));
  }
  return rep;
}

inline nlohmann::json report_to_json(const ExperimentReport& rep) {
  using nlohmann::json;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json rows = json::array();
  for (const auto& r : rep.results) {
    rows.push_back({{"model", variant_model_name(r.variant)},
                    {"variant", variant_id(r.variant)},
                    {"modalities", variant_modalities(r.variant)},
                    {"mae", r.test.mae},
                    {"rmse", r.test.rmse},
                    {"mape", r.test.mape},
                    {"n_test", r.test.n},
                    {"text_f1", opt(r.text_f1)},
                    {"image_f1", opt(r.image_f1)},
                    {"feature_width", r.feature_width},
                    {"best_epoch", r.best_epoch},
                    {"epochs_run", r.epochs_run},
                    {"l2", r.l2}});
  }
  return {{"config", rep.config},
          {"splits", {{"train", rep.n_train}, {"val", rep.n_val}, {"test", rep.n_test}}},
          {"stage1", {{"text_val_f1", opt(rep.text_val_f1)}, {"image_val_f1", opt(rep.image_val_f1)}}},
          {"results", rows}};
}

/// Aligned text table with columns Model, Modalities, MAE, RMSE, MAPE.
/// Works from the JSON form so stored reports can be re-rendered.
inline std::string render_report_table(const nlohmann::json& rep) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-7s %-15s %12s %12s %8s\n", "Model", "Modalities", "MAE", "RMSE", "MAPE");
  out += line;
  out += std::string(58, '-') + "\n";
  for (const auto& r : rep.at("results")) {
    std::snprintf(line, sizeof line, "%-7s %-15s %12.3f %12.3f %8.3f\n", r.at("model").get<std::string>().c_str(),
                  r.at("modalities").get<std::string>().c_str(), r.at("mae").get<double>(), r.at("rmse").get<double>(),
                  r.at("mape").get<double>());
    out += line;
  }
  if (rep.contains("stage1")) {
    const auto& s = rep["stage1"];
    auto fmt = [](const nlohmann::json& v) {
      if (v.is_null()) return std::string("n/a");
      char b[32];
      std::snprintf(b, sizeof b, "%.3f", v.get<double>());
      return std::string(b);
    };
    out += "\nStage-1 validation F1: text " + fmt(s.value("text_val_f1", nlohmann::json())) + ", image " +
           fmt(s.value("image_val_f1", nlohmann::json())) + "\n";
  }
  if (rep.contains("splits")) {
    const auto& s = rep["splits"];
    out += "Instances: train " + std::to_string(s.value("train", 0)) + ", val " + std::to_string(s.value("val", 0)) +
           ", test " + std::to_string(s.value("test", 0)) + "\n";
  }
  return out;
}

}  // namespace mimic
