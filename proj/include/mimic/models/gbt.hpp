#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mimic/models/classifier_input.hpp"
#include "mimic/models/decision_tree.hpp"
#include "mimic/models/model_io.hpp"
#include "mimic/models/train_config.hpp"

namespace mimic {

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Boosted ensemble of regression trees on the logit scale.
class GbtClassifier {
 public:
  GbtClassifier() = default;
  GbtClassifier(GbtParams params, std::size_t width, double base_score, std::vector<DecisionTree> trees)
      : params_(params), width_(width), base_score_(base_score), trees_(std::move(trees)) {}

  [[nodiscard]] double margin(std::span<const double> row) const {
    detail::check_width(row, width_, "GbtClassifier");
    double z = base_score_;
    for (const auto& t : trees_) z += params_.learning_rate * t.predict(row);
    return z;
  }

  /// P(label = 1), kept strictly inside (0, 1).
  [[nodiscard]] double predict_proba(std::span<const double> row) const {
    return std::clamp(sigmoid(margin(row)), 1e-15, 1.0 - 1e-15);
  }

  [[nodiscard]] const GbtParams& params() const { return params_; }
  [[nodiscard]] std::size_t width() const { return width_; }
  [[nodiscard]] double base_score() const { return base_score_; }
  [[nodiscard]] const std::vector<DecisionTree>& trees() const { return trees_; }
  [[nodiscard]] std::size_t n_trees() const { return trees_.size(); }

  /// Mean training log-loss after the base score and after each round.
  [[nodiscard]] const std::vector<double>& training_loss() const { return training_loss_; }
  void set_training_loss(std::vector<double> l) { training_loss_ = std::move(l); }

  [[nodiscard]] std::string serialize() const {
    ByteWriter w;
    write_model_header(w, ModelKind::gbt, nlohmann::json(params_), width_);
    w.put(base_score_);
    w.put(std::uint64_t(trees_.size()));
    for (const auto& t : trees_) t.write(w);
    return std::move(w).bytes();
  }

  static GbtClassifier deserialize(std::string_view bytes) {
    ByteReader r(bytes, "gbt model");
    const auto h = read_model_header(r, ModelKind::gbt);
    const double base = r.get<double>();
    const auto n = r.get<std::uint64_t>();
    if (n > r.remaining()) r.fail("bad tree count");
    std::vector<DecisionTree> trees;
    for (std::uint64_t i = 0; i < n; ++i) trees.push_back(DecisionTree::read(r, h.width));
    if (r.remaining() != 0) r.fail("trailing bytes");
    return GbtClassifier(h.config.get<GbtParams>(), h.width, base, std::move(trees));
  }

  [[nodiscard]] std::string describe() const {
    std::ostringstream os;
    os << "GbtClassifier\n  config: " << nlohmann::json(params_).dump() << "\n  input width: " << width_
       << "\n  base score (log-odds): " << base_score_ << "\n  trees: " << trees_.size() << "\n";
    for (std::size_t i = 0; i < trees_.size(); ++i)
      os << "    tree " << i << ": depth " << trees_[i].depth() << ", leaves " << trees_[i].leaf_count() << "\n";
    return os.str();
  }

 private:
  GbtParams params_;
  std::size_t width_ = 0;
  double base_score_ = 0.0;
  std::vector<DecisionTree> trees_;
  std::vector<double> training_loss_;
};

namespace detail {

inline double mean_log_loss(std::span<const double> margins, std::span<const int> labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    // log(1 + exp(-z)) for y = 1, log(1 + exp(z)) for y = 0, computed stably
    const double z = labels[i] ? margins[i] : -margins[i];
    s += z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
  }
  return s / double(margins.size());
}

struct NewtonPolicy {
  std::span<const double> grad, hess;
  double lambda, min_child_weight;

  [[nodiscard]] SplitStats stats(std::size_t r) const { return {grad[r], hess[r], 1.0}; }
  [[nodiscard]] double score(const SplitStats& s) const { return s.a * s.a / (s.b + lambda); }
  [[nodiscard]] bool admissible(const SplitStats& s) const { return s.b >= min_child_weight; }
  [[nodiscard]] bool pure(const SplitStats& s) const { return s.n < 2; }
  [[nodiscard]] double leaf(const SplitStats& s) const { return -s.a / (s.b + lambda); }
};

}  // namespace detail

/// Fits logistic-loss gradient boosting: each round grows one depth-limited
/// tree on the gradient and hessian of the current margins and adds it with
/// shrinkage. Starts from the prior log-odds of the labels.
inline GbtClassifier train_gbt(const Matrix& x, std::span<const int> labels, const TrainConfig& cfg) {
  detail::check_classifier_inputs(x, labels, "train_gbt");
  const auto& p = cfg.gbt;
  if (!(p.subsample > 0.0 && p.subsample <= 1.0)) throw InvalidArgument("train_gbt: subsample must be in (0, 1]");
  const std::size_t n = x.rows();
  const double pos = double(std::accumulate(labels.begin(), labels.end(), 0));
  const double prior = pos / double(n);
  const double base = std::log(prior / (1.0 - prior));

  Rng rng(derive_seed(cfg.seed, 0x6b74));
  std::vector<double> margin(n, base), grad(n), hess(n);
  std::vector<DecisionTree> trees;
  std::vector<double> losses{detail::mean_log_loss(margin, labels)};
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);

  for (std::size_t round = 0; round < p.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double prob = sigmoid(margin[i]);
      grad[i] = prob - labels[i];
      hess[i] = std::max(prob * (1.0 - prob), 1e-16);
    }
    std::vector<std::size_t> rows = all;
    if (p.subsample < 1.0) {
      rng.shuffle(rows);
      rows.resize(std::max<std::size_t>(1, std::size_t(std::floor(p.subsample * double(n)))));
      std::sort(rows.begin(), rows.end());
    }
    const detail::NewtonPolicy policy{grad, hess, p.lambda, p.min_child_weight};
    auto tree = detail::grow_tree(x, std::move(rows), policy, {p.max_depth, 0}, &rng);
    for (std::size_t i = 0; i < n; ++i) margin[i] += p.learning_rate * tree.predict(x.row(i));
    trees.push_back(std::move(tree));
    losses.push_back(detail::mean_log_loss(margin, labels));
  }

  GbtClassifier model(p, x.cols(), base, std::move(trees));
  model.set_training_loss(std::move(losses));
  return model;
}

}  // namespace mimic
