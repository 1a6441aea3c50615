#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "mimic/core/binary.hpp"
#include "mimic/core/matrix.hpp"
#include "mimic/core/random.hpp"

namespace mimic {

struct TreeNode {
  std::int32_t feature = -1;  ///< -1 marks a leaf
  double threshold = 0.0;     ///< rows with x[feature] <= threshold go left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;         ///< leaf output

  [[nodiscard]] bool is_leaf() const { return feature < 0; }

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Binary decision tree stored as a flat node array; node 0 is the root.
class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<TreeNode> nodes, std::size_t depth) : nodes_(std::move(nodes)), depth_(depth) {}

  [[nodiscard]] double predict(std::span<const double> row) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf())
      i = std::size_t(row[std::size_t(nodes_[i].feature)] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right);
    return nodes_[i].value;
  }

  [[nodiscard]] const std::vector<TreeNode>& nodes() const { return nodes_; }
  [[nodiscard]] std::size_t depth() const { return depth_; }
  [[nodiscard]] std::size_t leaf_count() const {
    return std::size_t(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
  }

  void write(ByteWriter& w) const {
    w.put(std::uint64_t(depth_));
    w.put(std::uint64_t(nodes_.size()));
    for (const auto& n : nodes_) {
      w.put(n.feature);
      w.put(n.threshold);
      w.put(n.left);
      w.put(n.right);
      w.put(n.value);
    }
  }

  static DecisionTree read(ByteReader& r, std::size_t width) {
    const auto depth = r.get<std::uint64_t>();
    const auto count = r.get<std::uint64_t>();
    if (count == 0 || count > r.remaining()) r.fail("bad tree node count");
    std::vector<TreeNode> nodes(count);
    for (auto& n : nodes) {
      n.feature = r.get<std::int32_t>();
      n.threshold = r.get<double>();
      n.left = r.get<std::int32_t>();
      n.right = r.get<std::int32_t>();
      n.value = r.get<double>();
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto& n = nodes[i];
      if (n.is_leaf()) continue;
      if (std::size_t(n.feature) >= width || n.left <= std::int32_t(i) || n.right <= std::int32_t(i) ||
          std::size_t(n.left) >= count || std::size_t(n.right) >= count)
        r.fail("malformed tree node");
    }
    return DecisionTree(std::move(nodes), depth);
  }

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t depth_ = 0;
};

namespace detail {

/// Sufficient statistics for a split criterion: (a, b, c) with meaning set
/// by the policy. Gradient trees use (sum g, sum h, count); Gini trees use
/// (weight of class 1, total weight, count).
struct SplitStats {
  double a = 0.0;
  double b = 0.0;
  double n = 0.0;

  SplitStats& operator+=(const SplitStats& o) {
    a += o.a;
    b += o.b;
    n += o.n;
    return *this;
  }
  friend SplitStats operator-(SplitStats x, const SplitStats& y) { return {x.a - y.a, x.b - y.b, x.n - y.n}; }
};

struct TreeGrowth {
  std::size_t max_depth = 6;
  std::size_t features_per_split = 0;  ///< 0 = all features, in order
};

/// Exact greedy CART builder. The policy supplies per-row statistics,
/// the node score (split gain = score(L) + score(R) - score(parent)),
/// child admissibility, purity and leaf values.
template <typename Policy>
DecisionTree grow_tree(const Matrix& x, std::vector<std::size_t> rows, const Policy& policy, const TreeGrowth& growth,
                       Rng* rng) {
  struct Pending {
    std::int32_t node;
    std::size_t begin, end, depth;
  };
  std::vector<TreeNode> nodes(1);
  std::vector<Pending> stack{{0, 0, rows.size(), 0}};
  std::size_t max_depth_seen = 0;
  std::vector<std::size_t> features(x.cols());
  std::iota(features.begin(), features.end(), 0);
  std::vector<std::pair<double, std::size_t>> order;

  while (!stack.empty()) {
    const Pending p = stack.back();
    stack.pop_back();
    const std::span<std::size_t> node_rows(rows.data() + p.begin, p.end - p.begin);

    SplitStats total;
    for (auto r : node_rows) total += policy.stats(r);
    nodes[std::size_t(p.node)].value = policy.leaf(total);
    max_depth_seen = std::max(max_depth_seen, p.depth);
    if (p.depth >= growth.max_depth || policy.pure(total)) continue;

    std::span<const std::size_t> candidates(features);
    if (growth.features_per_split > 0 && growth.features_per_split < features.size()) {
      // partial Fisher-Yates: the first k entries become a uniform sample
      for (std::size_t i = 0; i < growth.features_per_split; ++i)
        std::swap(features[i], features[i + rng->below(features.size() - i)]);
      candidates = std::span<const std::size_t>(features.data(), growth.features_per_split);
    }

    const double parent_score = policy.score(total);
    double best_gain = 1e-12;
    std::optional<std::pair<std::size_t, double>> best;
    for (const auto f : candidates) {
      order.clear();
      for (auto r : node_rows) order.emplace_back(x(r, f), r);
      std::sort(order.begin(), order.end());
      SplitStats left;
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        left += policy.stats(order[k].second);
        if (order[k].first == order[k + 1].first) continue;
        const SplitStats right = total - left;
        if (!policy.admissible(left) || !policy.admissible(right)) continue;
        const double gain = policy.score(left) + policy.score(right) - parent_score;
        if (gain > best_gain) {
          best_gain = gain;
          const double lo = order[k].first, hi = order[k + 1].first;
          const double mid = lo + (hi - lo) / 2.0;
          best = {f, mid < hi ? mid : lo};
        }
      }
    }
    if (!best) continue;

    const auto [feature, threshold] = *best;
    const auto mid = std::stable_partition(node_rows.begin(), node_rows.end(),
                                           [&](std::size_t r) { return x(r, feature) <= threshold; });
    const std::size_t split = p.begin + std::size_t(mid - node_rows.begin());
    const auto left_id = std::int32_t(nodes.size());
    nodes.resize(nodes.size() + 2);
    auto& n = nodes[std::size_t(p.node)];
    n.feature = std::int32_t(feature);
    n.threshold = threshold;
    n.left = left_id;
    n.right = left_id + 1;
    // right pushed first so the left subtree is expanded first
    stack.push_back({left_id + 1, split, p.end, p.depth + 1});
    stack.push_back({left_id, p.begin, split, p.depth + 1});
  }
  return DecisionTree(std::move(nodes), max_depth_seen);
}

}  // namespace detail
}  // namespace mimic
