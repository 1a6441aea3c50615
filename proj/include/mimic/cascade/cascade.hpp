#pragma once

#include <filesystem>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mimic/cascade/access_log.hpp"
#include "mimic/cascade/variant.hpp"
#include "mimic/dataset/manifest.hpp"
#include "mimic/eval/metrics.hpp"
#include "mimic/features/embedding_io.hpp"
#include "mimic/models/gbt.hpp"
#include "mimic/models/mlp.hpp"
#include "mimic/models/random_forest.hpp"

namespace mimic {

/// An instance together with its processed embeddings: the text embedding
/// truncated to the working dimension, and the image embeddings mean-pooled
/// at full dimension and then truncated. Absent modalities stay empty.
struct PreparedInstance {
  EarningsInstance instance;
  std::optional<Embedding> text;
  std::optional<Embedding> image;
};

namespace detail {

inline std::vector<Embedding> load_rows(const std::filesystem::path& root, const std::string& ref, Modality expected) {
  const std::filesystem::path p(ref);
  const auto file = read_embedding_file(p.is_absolute() ? p : root / p);
  if (file.modality != expected)
    throw DataError("embedding file '" + ref + "' has modality " + to_string(file.modality) + ", expected " +
                    to_string(expected));
  if (file.rows.empty()) throw DataError("embedding file '" + ref + "' has no rows");
  return to_embeddings(file);
}

}  // namespace detail

inline PreparedInstance prepare_instance(const std::filesystem::path& root, const EarningsInstance& inst,
                                         std::size_t dim) {
  PreparedInstance p{inst, std::nullopt, std::nullopt};
  try {
    if (inst.text_embedding_ref) {
      auto rows = detail::load_rows(root, *inst.text_embedding_ref, Modality::text);
      const Embedding full = rows.size() == 1 ? rows.front() : mean_pool(rows);
      p.text = truncate_matryoshka(full, dim);
    }
    if (!inst.image_embedding_refs.empty()) {
      std::vector<Embedding> rows;
      for (const auto& ref : inst.image_embedding_refs) {
        auto r = detail::load_rows(root, ref, Modality::image);
        rows.insert(rows.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
      }
      p.image = truncate_matryoshka(mean_pool(rows), dim);
    }
  } catch (const Error& e) {
    throw DataError(inst.key() + ": " + e.what());
  }
  return p;
}

inline std::vector<PreparedInstance> prepare_instances(const std::filesystem::path& root,
                                                       std::span<const EarningsInstance> instances, std::size_t dim) {
  std::vector<PreparedInstance> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(prepare_instance(root, inst, dim));
  return out;
}

namespace detail {

inline double read_target(const PreparedInstance& p, TargetUse use, TargetAccessLog* log) {
  if (log) log->record(p.instance.key(), use);
  return p.instance.open_d1;
}

inline int read_direction(const PreparedInstance& p, TargetUse use, TargetAccessLog* log) {
  return direction_label(p.instance.open_d, read_target(p, use, log));
}

}  // namespace detail

/// Stage-1 direction classifiers. Instances lacking a modality receive the
/// class-1 frequency of that classifier's training rows.
struct Stage1Models {
  std::optional<GbtClassifier> text;
  double text_prior = 0.5;
  std::optional<RfClassifier> image;
  double image_prior = 0.5;

  [[nodiscard]] double text_probability(const PreparedInstance& p) const {
    if (!text) throw InvalidArgument("text probability requested but no text classifier was fitted");
    return p.text ? text->predict_proba(p.text->values) : text_prior;
  }
  [[nodiscard]] double image_probability(const PreparedInstance& p) const {
    if (!image) throw InvalidArgument("image probability requested but no image classifier was fitted");
    return p.image ? image->predict_proba(p.image->values) : image_prior;
  }
};

struct Stage1Fit {
  Stage1Models models;
  /// Out-of-fold probabilities aligned with the training rows.
  std::vector<double> text_oof;
  std::vector<double> image_oof;
  std::optional<double> text_val_f1;
  std::optional<double> image_val_f1;
  std::size_t text_train_rows = 0;
  std::size_t image_train_rows = 0;
};

namespace detail {

struct ModalityData {
  Matrix x;
  std::vector<int> y;
  std::vector<std::size_t> source;  ///< index into the instance list
};

inline ModalityData modality_rows(std::span<const PreparedInstance> items, bool text, TargetUse use,
                                  TargetAccessLog* log) {
  ModalityData d;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& e = text ? items[i].text : items[i].image;
    if (!e) continue;
    d.x.push_row(e->values);
    d.y.push_back(read_direction(items[i], use, log));
    d.source.push_back(i);
  }
  return d;
}

template <typename Model, typename Trainer>
void fit_modality(std::span<const PreparedInstance> train, std::span<const PreparedInstance> val, bool text,
                  const TrainConfig& cfg, TargetAccessLog* log, Trainer&& trainer, std::optional<Model>& model,
                  double& prior, std::vector<double>& oof, std::optional<double>& val_f1, std::size_t& n_rows) {
  const auto d = modality_rows(train, text, TargetUse::stage1_fit, log);
  n_rows = d.y.size();
  const char* name = text ? "text" : "image";
  if (d.y.empty()) throw TrainingError(std::string("stage-1 ") + name + " classifier: no training rows with this modality");
  prior = double(std::accumulate(d.y.begin(), d.y.end(), 0)) / double(d.y.size());

  TrainConfig full_cfg = cfg;
  full_cfg.seed = derive_seed(cfg.seed, text ? 0x7431 : 0x6931);
  try {
    model = trainer(d.x, d.y, full_cfg);
  } catch (const Error& e) {
    throw TrainingError(std::string("stage-1 ") + name + " classifier: " + e.what());
  }

  // Out-of-fold probabilities for the training rows keep the stage-2
  // regressor from seeing in-sample classifier confidence.
  oof.assign(train.size(), prior);
  const std::size_t k = cfg.stage1_folds;
  if (k < 2) {
    for (std::size_t r = 0; r < d.y.size(); ++r) oof[d.source[r]] = model->predict_proba(d.x.row(r));
  } else {
    std::vector<std::size_t> perm(d.y.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(cfg.seed, text ? 0x746f6f66 : 0x696f6f66));
    rng.shuffle(perm);
    std::vector<std::size_t> fold(d.y.size());
    for (std::size_t i = 0; i < perm.size(); ++i) fold[perm[i]] = i % k;
    for (std::size_t f = 0; f < k; ++f) {
      std::vector<std::size_t> fit_rows, held;
      for (std::size_t r = 0; r < d.y.size(); ++r) (fold[r] == f ? held : fit_rows).push_back(r);
      if (held.empty()) continue;
      std::vector<int> fy;
      for (auto r : fit_rows) fy.push_back(d.y[r]);
      const int pos = std::accumulate(fy.begin(), fy.end(), 0);
      if (fit_rows.size() < 2 || pos == 0 || pos == int(fy.size())) {
        const double fp = fy.empty() ? prior : double(pos) / double(fy.size());
        for (auto r : held) oof[d.source[r]] = fp;
        continue;
      }
      TrainConfig fold_cfg = cfg;
      fold_cfg.seed = derive_seed(full_cfg.seed, 1 + f);
      const Model fm = trainer(d.x.select_rows(fit_rows), fy, fold_cfg);
      for (auto r : held) oof[d.source[r]] = fm.predict_proba(d.x.row(r));
    }
  }

  const auto v = modality_rows(val, text, TargetUse::stage1_validation, log);
  if (!v.y.empty()) {
    std::vector<int> pred;
    for (std::size_t r = 0; r < v.y.size(); ++r) pred.push_back(model->predict_proba(v.x.row(r)) >= 0.5 ? 1 : 0);
    val_f1 = f1_binary(pred, v.y);
  }
}

}  // namespace detail

/// Fits the requested stage-1 classifiers on training rows that carry the
/// modality: gradient-boosted trees for text, a random forest for images.
/// Validation rows are only used to report F1 at threshold 0.5.
inline Stage1Fit fit_stage1(std::span<const PreparedInstance> train, std::span<const PreparedInstance> val, bool text,
                            bool image, const TrainConfig& cfg, TargetAccessLog* log = nullptr) {
  Stage1Fit out;
  if (text)
    detail::fit_modality<GbtClassifier>(
        train, val, true, cfg, log, [](const Matrix& x, std::span<const int> y, const TrainConfig& c) { return train_gbt(x, y, c); },
        out.models.text, out.models.text_prior, out.text_oof, out.text_val_f1, out.text_train_rows);
  if (image)
    detail::fit_modality<RfClassifier>(
        train, val, false, cfg, log, [](const Matrix& x, std::span<const int> y, const TrainConfig& c) { return train_rf(x, y, c); },
        out.models.image, out.models.image_prior, out.image_oof, out.image_val_f1, out.image_train_rows);
  return out;
}

/// Column names of the stage-2 feature row for a variant.
inline std::vector<std::string> feature_schema(Variant v, std::size_t dim) {
  std::vector<std::string> cols(kNumericColumnNames.begin(), kNumericColumnNames.end());
  auto add_block = [&](const char* prefix) {
    for (std::size_t i = 0; i < dim; ++i) cols.push_back(std::string(prefix) + "_emb_" + std::to_string(i));
    cols.push_back(std::string(prefix) + "_missing");
  };
  if (uses_text_embedding(v)) add_block("text");
  if (uses_image_embedding(v)) add_block("image");
  if (uses_text_probability(v)) cols.emplace_back("text_prob");
  if (uses_image_probability(v)) cols.emplace_back("image_prob");
  return cols;
}

namespace detail {

inline std::vector<double> assemble_row(const PreparedInstance& p, Variant v, std::size_t dim,
                                        std::optional<double> text_p, std::optional<double> image_p) {
  std::vector<double> row;
  p.instance.numeric.append_to(row);
  auto slot = [&](const std::optional<Embedding>& e, Modality m) {
    if (e && e->dim() != dim)
      throw DataError(p.instance.key() + ": embedding dim " + std::to_string(e->dim()) + " != " + std::to_string(dim));
    const ModalitySlot s = e ? ModalitySlot{*e, false} : encode_missing_modality(dim, m);
    s.append_to(row);
  };
  if (uses_text_embedding(v)) slot(p.text, Modality::text);
  if (uses_image_embedding(v)) slot(p.image, Modality::image);
  if (uses_text_probability(v)) row.push_back(text_p.value());
  if (uses_image_probability(v)) row.push_back(image_p.value());
  return row;
}

}  // namespace detail

/// Stage-2 feature row: numeric block, then embedding blocks (values plus a
/// missing indicator) or stage-1 probabilities, depending on the variant.
inline std::vector<double> build_features(const PreparedInstance& p, Variant v, const Stage1Models* stage1,
                                          std::size_t dim = kDefaultEmbeddingDim) {
  std::optional<double> tp, ip;
  if (needs_stage1(v) && !stage1)
    throw InvalidArgument(std::string("variant ") + std::string(variant_id(v)) + " requires stage-1 classifiers");
  if (uses_text_probability(v)) tp = stage1->text_probability(p);
  if (uses_image_probability(v)) ip = stage1->image_probability(p);
  return detail::assemble_row(p, v, dim, tp, ip);
}

struct CascadeModel {
  Variant variant = Variant::N;
  Stage1Models stage1;
  MlpRegressor regressor;
  std::vector<std::string> schema;
  std::size_t embedding_dim = kDefaultEmbeddingDim;
};

/// Predicted next-day opening price.
inline double predict(const CascadeModel& m, const PreparedInstance& p) {
  const auto row = build_features(p, m.variant, needs_stage1(m.variant) ? &m.stage1 : nullptr, m.embedding_dim);
  if (row.size() != m.schema.size() || row.size() != m.regressor.width())
    throw DataError(p.instance.key() + ": feature row width does not match the model schema");
  return m.regressor.predict(row);
}

struct CascadeFit {
  CascadeModel model;
  std::optional<double> text_val_f1;
  std::optional<double> image_val_f1;
};

/// Fits one variant. Stage-1 classifiers (if the variant uses probability
/// features) are fit on `train` unless `stage1` is supplied; the regressor
/// is trained from scratch on the variant's feature rows with early
/// stopping on `val`; its L2 strength is picked from cfg.l2_grid on `val`.
inline CascadeFit fit_cascade(std::span<const PreparedInstance> train, std::span<const PreparedInstance> val, Variant v,
                              const TrainConfig& cfg, TargetAccessLog* log = nullptr,
                              const Stage1Fit* stage1 = nullptr) {
  if (train.empty()) throw InvalidArgument("fit_cascade: empty training split");
  CascadeFit out;
  out.model.variant = v;
  out.model.embedding_dim = cfg.embedding_dim;
  out.model.schema = feature_schema(v, cfg.embedding_dim);

  std::optional<Stage1Fit> own;
  if (needs_stage1(v) && !stage1) {
    own = fit_stage1(train, val, uses_text_probability(v), uses_image_probability(v), cfg, log);
    stage1 = &*own;
  }
  if (needs_stage1(v)) {
    if (uses_text_probability(v) && !stage1->models.text) throw InvalidArgument("fit_cascade: missing text classifier");
    if (uses_image_probability(v) && !stage1->models.image) throw InvalidArgument("fit_cascade: missing image classifier");
    if (uses_text_probability(v)) {
      out.model.stage1.text = stage1->models.text;
      out.model.stage1.text_prior = stage1->models.text_prior;
      out.text_val_f1 = stage1->text_val_f1;
    }
    if (uses_image_probability(v)) {
      out.model.stage1.image = stage1->models.image;
      out.model.stage1.image_prior = stage1->models.image_prior;
      out.image_val_f1 = stage1->image_val_f1;
    }
  }

  Matrix x;
  std::vector<double> y;
  for (std::size_t i = 0; i < train.size(); ++i) {
    std::optional<double> tp, ip;
    if (uses_text_probability(v)) tp = stage1->text_oof.at(i);
    if (uses_image_probability(v)) ip = stage1->image_oof.at(i);
    x.push_row(detail::assemble_row(train[i], v, cfg.embedding_dim, tp, ip));
    y.push_back(detail::read_target(train[i], TargetUse::stage2_fit, log));
  }
  Matrix vx;
  std::vector<double> vy;
  for (const auto& p : val) {
    vx.push_row(build_features(p, v, &out.model.stage1, cfg.embedding_dim));
    vy.push_back(detail::read_target(p, TargetUse::early_stopping, log));
  }
  out.model.regressor = train_mlp_l2_grid(x, y, cfg, MlpValidation{val.empty() ? nullptr : &vx, vy});
  return out;
}

}  // namespace mimic
