#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mimic/models/classifier_input.hpp"
#include "mimic/models/decision_tree.hpp"
#include "mimic/models/model_io.hpp"
#include "mimic/models/train_config.hpp"

namespace mimic {

/// Bagged Gini trees; the probability is the mean of per-tree leaf
/// class-1 frequencies.
class RfClassifier {
 public:
  RfClassifier() = default;
  RfClassifier(RfParams params, std::size_t width, std::vector<DecisionTree> trees)
      : params_(params), width_(width), trees_(std::move(trees)) {}

  [[nodiscard]] double predict_proba(std::span<const double> row) const {
    detail::check_width(row, width_, "RfClassifier");
    if (trees_.empty()) return 0.5;
    double s = 0.0;
    for (const auto& t : trees_) s += t.predict(row);
    return s / double(trees_.size());
  }

  [[nodiscard]] std::vector<double> per_tree_proba(std::span<const double> row) const {
    detail::check_width(row, width_, "RfClassifier");
    std::vector<double> out;
    for (const auto& t : trees_) out.push_back(t.predict(row));
    return out;
  }

  [[nodiscard]] const RfParams& params() const { return params_; }
  [[nodiscard]] std::size_t width() const { return width_; }
  [[nodiscard]] const std::vector<DecisionTree>& trees() const { return trees_; }
  [[nodiscard]] std::size_t n_trees() const { return trees_.size(); }

  /// Out-of-bag accuracy at threshold 0.5; empty when no row was ever out of bag.
  [[nodiscard]] std::optional<double> oob_accuracy() const { return oob_accuracy_; }
  void set_oob_accuracy(std::optional<double> a) { oob_accuracy_ = a; }

  [[nodiscard]] std::string serialize() const {
    ByteWriter w;
    write_model_header(w, ModelKind::random_forest, nlohmann::json(params_), width_);
    w.put(std::uint64_t(trees_.size()));
    for (const auto& t : trees_) t.write(w);
    return std::move(w).bytes();
  }

  static RfClassifier deserialize(std::string_view bytes) {
    ByteReader r(bytes, "random forest model");
    const auto h = read_model_header(r, ModelKind::random_forest);
    const auto n = r.get<std::uint64_t>();
    if (n > r.remaining()) r.fail("bad tree count");
    std::vector<DecisionTree> trees;
    for (std::uint64_t i = 0; i < n; ++i) trees.push_back(DecisionTree::read(r, h.width));
    if (r.remaining() != 0) r.fail("trailing bytes");
    return RfClassifier(h.config.get<RfParams>(), h.width, std::move(trees));
  }

  [[nodiscard]] std::string describe() const {
    std::ostringstream os;
    os << "RfClassifier\n  config: " << nlohmann::json(params_).dump() << "\n  input width: " << width_
       << "\n  trees: " << trees_.size() << "\n";
    if (oob_accuracy_) os << "  oob accuracy: " << *oob_accuracy_ << "\n";
    for (std::size_t i = 0; i < trees_.size(); ++i)
      os << "    tree " << i << ": depth " << trees_[i].depth() << ", leaves " << trees_[i].leaf_count() << "\n";
    return os.str();
  }

 private:
  RfParams params_;
  std::size_t width_ = 0;
  std::vector<DecisionTree> trees_;
  std::optional<double> oob_accuracy_;
};

namespace detail {

struct GiniPolicy {
  std::span<const double> weight;
  std::span<const int> labels;
  double min_leaf;

  [[nodiscard]] SplitStats stats(std::size_t r) const { return {weight[r] * labels[r], weight[r], weight[r]}; }
  // Negative weighted Gini impurity up to a constant: (w1^2 + w0^2) / w.
  [[nodiscard]] double score(const SplitStats& s) const { return (s.a * s.a + (s.b - s.a) * (s.b - s.a)) / s.b; }
  [[nodiscard]] bool admissible(const SplitStats& s) const { return s.b >= min_leaf; }
  [[nodiscard]] bool pure(const SplitStats& s) const { return s.a == 0.0 || s.a == s.b || s.b < 2 * min_leaf; }
  [[nodiscard]] double leaf(const SplitStats& s) const { return s.a / s.b; }
};

}  // namespace detail

/// Fits a random forest: each tree sees a bootstrap resample of the rows and
/// a fresh random feature subset at every split. Tree seeds derive from
/// cfg.seed and the tree index only.
inline RfClassifier train_rf(const Matrix& x, std::span<const int> labels, const TrainConfig& cfg) {
  detail::check_classifier_inputs(x, labels, "train_rf");
  const auto& p = cfg.rf;
  const std::size_t n = x.rows();
  const std::size_t mtry = p.features_per_split > 0
                               ? std::min(p.features_per_split, x.cols())
                               : std::max<std::size_t>(1, std::size_t(std::floor(std::sqrt(double(x.cols())))));

  std::vector<DecisionTree> trees;
  std::vector<double> oob_sum(n, 0.0);
  std::vector<std::size_t> oob_count(n, 0);
  for (std::size_t t = 0; t < p.trees; ++t) {
    Rng rng(derive_seed(cfg.seed, 0x7266'0000ULL + t));
    std::vector<double> weight(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) weight[rng.below(n)] += 1.0;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i)
      if (weight[i] > 0) rows.push_back(i);
    const detail::GiniPolicy policy{weight, labels, double(std::max<std::size_t>(1, p.min_samples_leaf))};
    auto tree = detail::grow_tree(x, std::move(rows), policy, {p.max_depth, mtry}, &rng);
    for (std::size_t i = 0; i < n; ++i)
      if (weight[i] == 0) {
        oob_sum[i] += tree.predict(x.row(i));
        ++oob_count[i];
      }
    trees.push_back(std::move(tree));
  }

  RfClassifier model(p, x.cols(), std::move(trees));
  std::size_t seen = 0, correct = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (oob_count[i] > 0) {
      ++seen;
      correct += int(oob_sum[i] / double(oob_count[i]) >= 0.5) == labels[i];
    }
  if (seen > 0) model.set_oob_accuracy(double(correct) / double(seen));
  return model;
}

}  // namespace mimic
