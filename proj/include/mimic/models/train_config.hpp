#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"

namespace mimic {

/// Gradient-boosted trees for the text-embedding classifier.
struct GbtParams {
  std::size_t rounds = 30;
  std::size_t max_depth = 6;
  double learning_rate = 0.1;
  double subsample = 1.0;  ///< row fraction per round, without replacement
  double lambda = 1.0;     ///< L2 penalty on leaf weights
  double min_child_weight = 1.0;

  friend bool operator==(const GbtParams&, const GbtParams&) = default;
};

/// Random forest for the image-embedding classifier.
struct RfParams {
  std::size_t trees = 40;
  std::size_t max_depth = 20;
  std::size_t min_samples_leaf = 1;
  std::size_t features_per_split = 0;  ///< 0 selects floor(sqrt(width))

  friend bool operator==(const RfParams&, const RfParams&) = default;
};

/// Feed-forward regressor trained with Adam on standardized data.
struct MlpParams {
  std::vector<std::size_t> hidden = {20, 20, 20};
  double dropout = 0.10;
  std::size_t epochs = 400;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::size_t patience = 40;  ///< epochs without validation improvement before stopping
  double l2 = 0.0;            ///< penalty on squared connection weights (biases excluded)
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

struct TrainConfig {
  std::uint64_t seed = 7;
  GbtParams gbt;
  RfParams rf;
  MlpParams mlp;
  std::size_t stage1_folds = 5;  ///< out-of-fold folds for stage-1 probabilities on training rows
  std::size_t embedding_dim = 128;
  /// Candidate values for mlp.l2; the one with the lowest validation MSE is
  /// kept. Empty, or no validation rows, trains with mlp.l2 as given.
  std::vector<double> l2_grid = {0.0, 1e-3, 3e-3, 1e-2, 3e-2};

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GbtParams, rounds, max_depth, learning_rate, subsample, lambda,
                                                min_child_weight)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RfParams, trees, max_depth, min_samples_leaf, features_per_split)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(MlpParams, hidden, dropout, epochs, batch_size, learning_rate, patience, l2,
                                                beta1, beta2, epsilon)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TrainConfig, seed, gbt, rf, mlp, stage1_folds, embedding_dim,
                                                l2_grid)

}  // namespace mimic
