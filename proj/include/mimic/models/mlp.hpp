#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mimic/core/random.hpp"
#include "mimic/models/model_io.hpp"
#include "mimic/models/standardizer.hpp"
#include "mimic/models/train_config.hpp"

namespace mimic {

/// Layer geometry of a dense network over a flat parameter vector. Layer l
/// stores its weights as an out x in row-major block followed by out biases.
class MlpLayout {
 public:
  MlpLayout() = default;
  explicit MlpLayout(std::vector<std::size_t> widths) : widths_(std::move(widths)) {
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      weight_offset_.push_back(off);
      off += widths_[l] * widths_[l + 1];
      bias_offset_.push_back(off);
      off += widths_[l + 1];
    }
    size_ = off;
  }

  [[nodiscard]] const std::vector<std::size_t>& widths() const { return widths_; }
  [[nodiscard]] std::size_t layers() const { return weight_offset_.size(); }
  [[nodiscard]] std::size_t in(std::size_t l) const { return widths_[l]; }
  [[nodiscard]] std::size_t out(std::size_t l) const { return widths_[l + 1]; }
  [[nodiscard]] std::size_t weights(std::size_t l) const { return weight_offset_[l]; }
  [[nodiscard]] std::size_t biases(std::size_t l) const { return bias_offset_[l]; }
  [[nodiscard]] std::size_t parameter_count() const { return size_; }

  friend bool operator==(const MlpLayout& a, const MlpLayout& b) { return a.widths_ == b.widths_; }

 private:
  std::vector<std::size_t> widths_;
  std::vector<std::size_t> weight_offset_, bias_offset_;
  std::size_t size_ = 0;
};

/// Feed-forward regressor: rectifier hidden layers, linear scalar output.
/// Inputs and target are z-scored with training statistics; predictions
/// are returned on the original target scale.
class MlpRegressor {
 public:
  MlpRegressor() = default;
  MlpRegressor(MlpParams params, MlpLayout layout, std::vector<double> weights, Standardizer x_scaler, double y_mean,
               double y_scale)
      : params_(std::move(params)),
        layout_(std::move(layout)),
        weights_(std::move(weights)),
        x_scaler_(std::move(x_scaler)),
        y_mean_(y_mean),
        y_scale_(y_scale) {}

  /// He-uniform weights, zero biases, identity scalers.
  static MlpRegressor initialize(std::size_t width, const MlpParams& params, std::uint64_t seed) {
    std::vector<std::size_t> widths{width};
    widths.insert(widths.end(), params.hidden.begin(), params.hidden.end());
    widths.push_back(1);
    MlpLayout layout(widths);
    std::vector<double> w(layout.parameter_count(), 0.0);
    Rng rng(derive_seed(seed, 0x6d6c70));
    for (std::size_t l = 0; l < layout.layers(); ++l) {
      const double limit = std::sqrt(6.0 / double(layout.in(l)));
      for (std::size_t k = 0; k < layout.in(l) * layout.out(l); ++k) w[layout.weights(l) + k] = rng.uniform(-limit, limit);
    }
    return MlpRegressor(params, std::move(layout), std::move(w), Standardizer::identity(width), 0.0, 1.0);
  }

  [[nodiscard]] std::size_t width() const { return layout_.widths().front(); }

  /// Network output for an already standardized row, on the standardized
  /// target scale. Dropout is never applied here.
  [[nodiscard]] double forward_standardized(std::span<const double> z) const {
    std::vector<double> act(z.begin(), z.end()), next;
    for (std::size_t l = 0; l < layout_.layers(); ++l) {
      next.assign(layout_.out(l), 0.0);
      const double* w = weights_.data() + layout_.weights(l);
      const double* b = weights_.data() + layout_.biases(l);
      for (std::size_t o = 0; o < layout_.out(l); ++o) {
        double s = b[o];
        for (std::size_t i = 0; i < layout_.in(l); ++i) s += w[o * layout_.in(l) + i] * act[i];
        next[o] = (l + 1 < layout_.layers()) ? std::max(0.0, s) : s;
      }
      act.swap(next);
    }
    return act[0];
  }

  [[nodiscard]] double predict(std::span<const double> row) const {
    if (row.size() != width())
      throw InvalidArgument("MlpRegressor: row width " + std::to_string(row.size()) + " does not match model width " +
                            std::to_string(width()));
    std::vector<double> z(row.size());
    x_scaler_.apply(row, z);
    return forward_standardized(z) * y_scale_ + y_mean_;
  }

  [[nodiscard]] const MlpParams& params() const { return params_; }
  [[nodiscard]] const MlpLayout& layout() const { return layout_; }
  [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& weights() { return weights_; }
  [[nodiscard]] const Standardizer& x_scaler() const { return x_scaler_; }
  [[nodiscard]] double y_mean() const { return y_mean_; }
  [[nodiscard]] double y_scale() const { return y_scale_; }

  /// Epoch at which the kept parameters were reached (0 = initialization).
  [[nodiscard]] std::size_t best_epoch() const { return best_epoch_; }
  [[nodiscard]] std::size_t epochs_run() const { return epochs_run_; }
  void set_history(std::size_t best, std::size_t run) {
    best_epoch_ = best;
    epochs_run_ = run;
  }

  [[nodiscard]] std::string serialize() const {
    ByteWriter w;
    write_model_header(w, ModelKind::mlp, nlohmann::json(params_), width());
    std::vector<std::uint64_t> widths(layout_.widths().begin(), layout_.widths().end());
    w.put_vector<std::uint64_t>(widths);
    w.put_vector<double>(x_scaler_.mean());
    w.put_vector<double>(x_scaler_.scale());
    w.put(y_mean_);
    w.put(y_scale_);
    w.put_vector<double>(weights_);
    return std::move(w).bytes();
  }

  static MlpRegressor deserialize(std::string_view bytes) {
    ByteReader r(bytes, "mlp model");
    const auto h = read_model_header(r, ModelKind::mlp);
    const auto widths64 = r.get_vector<std::uint64_t>();
    if (widths64.size() < 2 || widths64.front() != h.width || widths64.back() != 1) r.fail("bad layer widths");
    MlpLayout layout(std::vector<std::size_t>(widths64.begin(), widths64.end()));
    auto mean = r.get_vector<double>();
    auto scale = r.get_vector<double>();
    if (mean.size() != h.width || scale.size() != h.width) r.fail("bad standardization block");
    const double ym = r.get<double>();
    const double ys = r.get<double>();
    auto weights = r.get_vector<double>();
    if (weights.size() != layout.parameter_count()) r.fail("parameter count does not match layout");
    if (r.remaining() != 0) r.fail("trailing bytes");
    return MlpRegressor(h.config.get<MlpParams>(), std::move(layout), std::move(weights),
                        Standardizer(std::move(mean), std::move(scale)), ym, ys);
  }

  [[nodiscard]] std::string describe() const {
    std::ostringstream os;
    os << "MlpRegressor\n  config: " << nlohmann::json(params_).dump() << "\n  layers:";
    for (auto wdt : layout_.widths()) os << " " << wdt;
    os << "\n  parameters: " << layout_.parameter_count() << "\n  target scaling: mean " << y_mean_ << ", scale "
       << y_scale_ << "\n";
    return os.str();
  }

 private:
  MlpParams params_;
  MlpLayout layout_;
  std::vector<double> weights_;
  Standardizer x_scaler_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  std::size_t best_epoch_ = 0;
  std::size_t epochs_run_ = 0;
};

/// Mean squared error of the network over `rows` of standardized data and,
/// when `grad` is given, its gradient w.r.t. `weights`. With a dropout RNG,
/// hidden units are dropped with probability `dropout` (inverted scaling).
inline double mlp_batch_loss(const MlpLayout& layout, std::span<const double> weights, const Matrix& zx,
                             std::span<const double> zy, std::span<const std::size_t> rows,
                             std::vector<double>* grad, double dropout = 0.0, Rng* dropout_rng = nullptr) {
  const std::size_t L = layout.layers();
  if (grad) grad->assign(weights.size(), 0.0);
  std::vector<std::vector<double>> act(L + 1), pre(L), mask(L);
  std::vector<double> delta, prev_delta;
  const double keep_scale = dropout > 0.0 ? 1.0 / (1.0 - dropout) : 1.0;
  double loss = 0.0;

  for (const std::size_t r : rows) {
    act[0].assign(zx.row(r).begin(), zx.row(r).end());
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t in = layout.in(l), out = layout.out(l);
      const double* w = weights.data() + layout.weights(l);
      const double* b = weights.data() + layout.biases(l);
      pre[l].assign(out, 0.0);
      act[l + 1].assign(out, 0.0);
      mask[l].assign(out, 1.0);
      const bool hidden = l + 1 < L;
      for (std::size_t o = 0; o < out; ++o) {
        double s = b[o];
        for (std::size_t i = 0; i < in; ++i) s += w[o * in + i] * act[l][i];
        pre[l][o] = s;
        if (!hidden) {
          act[l + 1][o] = s;
          continue;
        }
        if (dropout_rng && dropout > 0.0) mask[l][o] = dropout_rng->bernoulli(dropout) ? 0.0 : keep_scale;
        act[l + 1][o] = (s > 0.0 ? s : 0.0) * mask[l][o];
      }
    }
    const double err = act[L][0] - zy[r];
    loss += err * err;
    if (!grad) continue;

    delta.assign(1, 2.0 * err / double(rows.size()));
    for (std::size_t l = L; l-- > 0;) {
      const std::size_t in = layout.in(l), out = layout.out(l);
      double* gw = grad->data() + layout.weights(l);
      double* gb = grad->data() + layout.biases(l);
      const double* w = weights.data() + layout.weights(l);
      for (std::size_t o = 0; o < out; ++o) {
        gb[o] += delta[o];
        for (std::size_t i = 0; i < in; ++i) gw[o * in + i] += delta[o] * act[l][i];
      }
      if (l == 0) break;
      prev_delta.assign(in, 0.0);
      for (std::size_t i = 0; i < in; ++i) {
        // act[l] is the output of hidden layer l-1
        if (pre[l - 1][i] <= 0.0) continue;
        double s = 0.0;
        for (std::size_t o = 0; o < out; ++o) s += w[o * in + i] * delta[o];
        prev_delta[i] = s * mask[l - 1][i];
      }
      delta.swap(prev_delta);
    }
  }
  return loss / double(rows.size());
}

/// Validation split used for early stopping.
struct MlpValidation {
  const Matrix* x = nullptr;
  std::span<const double> y;
};

/// Trains the regressor with mini-batch Adam on MSE. Scalers are fit on the
/// training rows only. With validation data, training stops after
/// `patience` epochs without improvement and the best parameters are kept.
inline MlpRegressor train_mlp(const Matrix& x, std::span<const double> y, const TrainConfig& cfg,
                              MlpValidation val = {}) {
  const auto& p = cfg.mlp;
  if (x.rows() == 0) throw InvalidArgument("train_mlp: need at least 1 row");
  if (x.rows() != y.size()) throw InvalidArgument("train_mlp: feature/target row counts differ");
  if (!(p.dropout >= 0.0 && p.dropout < 1.0)) throw InvalidArgument("train_mlp: dropout must be in [0, 1)");
  if (p.batch_size == 0) throw InvalidArgument("train_mlp: batch size must be positive");
  if (!(p.l2 >= 0.0) || !std::isfinite(p.l2)) throw InvalidArgument("train_mlp: l2 must be finite and >= 0");
  for (double v : x.data())
    if (std::isinf(v)) throw InvalidArgument("train_mlp: infinite feature value");
  for (double v : y)
    if (!std::isfinite(v)) throw InvalidArgument("train_mlp: non-finite target");
  if (val.x && (val.x->rows() != val.y.size() || val.x->cols() != x.cols()))
    throw InvalidArgument("train_mlp: validation shape mismatch");

  const Standardizer xs = Standardizer::fit(x);
  double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / double(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - y_mean) * (v - y_mean);
  double y_scale = std::sqrt(ss / double(y.size()));
  if (!(y_scale > 1e-12 * std::max(1.0, std::abs(y_mean)))) y_scale = 1.0;

  const Matrix zx = xs.apply(x);
  std::vector<double> zy(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) zy[i] = (y[i] - y_mean) / y_scale;
  Matrix zvx;
  std::vector<double> zvy;
  std::vector<std::size_t> val_rows;
  if (val.x && val.x->rows() > 0) {
    zvx = xs.apply(*val.x);
    for (double v : val.y) zvy.push_back((v - y_mean) / y_scale);
    val_rows.resize(zvy.size());
    std::iota(val_rows.begin(), val_rows.end(), 0);
  }

  MlpRegressor init = MlpRegressor::initialize(x.cols(), p, cfg.seed);
  const MlpLayout layout = init.layout();
  std::vector<double> w = init.weights();
  std::vector<double> m(w.size(), 0.0), v(w.size(), 0.0), grad;
  std::vector<double> best = w;
  double best_val = val_rows.empty() ? 0.0 : mlp_batch_loss(layout, w, zvx, zvy, val_rows, nullptr);
  std::size_t best_epoch = 0, since_best = 0, epoch = 0, step = 0;

  Rng rng(derive_seed(cfg.seed, 0x747261696e));
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), 0);
  while (epoch < p.epochs) {
    ++epoch;
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += p.batch_size) {
      const std::span<const std::size_t> batch(order.data() + start, std::min(p.batch_size, order.size() - start));
      const double loss = mlp_batch_loss(layout, w, zx, zy, batch, &grad, p.dropout, &rng);
      if (!std::isfinite(loss))
        throw TrainingError("train_mlp: non-finite loss at epoch " + std::to_string(epoch) + " (diverged)");
      if (p.l2 > 0.0)
        for (std::size_t l = 0; l < layout.layers(); ++l)
          for (std::size_t k = layout.weights(l), e = k + layout.in(l) * layout.out(l); k < e; ++k)
            grad[k] += 2.0 * p.l2 * w[k];
      ++step;
      const double c1 = 1.0 - std::pow(p.beta1, double(step));
      const double c2 = 1.0 - std::pow(p.beta2, double(step));
      for (std::size_t k = 0; k < w.size(); ++k) {
        m[k] = p.beta1 * m[k] + (1.0 - p.beta1) * grad[k];
        v[k] = p.beta2 * v[k] + (1.0 - p.beta2) * grad[k] * grad[k];
        w[k] -= p.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + p.epsilon);
      }
    }
    if (val_rows.empty()) continue;
    const double vl = mlp_batch_loss(layout, w, zvx, zvy, val_rows, nullptr);
    if (!std::isfinite(vl)) throw TrainingError("train_mlp: non-finite validation loss (diverged)");
    if (vl < best_val) {
      best_val = vl;
      best = w;
      best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= p.patience) {
      break;
    }
  }
  if (val_rows.empty()) {
    best = std::move(w);
    best_epoch = epoch;
  }
  for (double k : best)
    if (!std::isfinite(k)) throw TrainingError("train_mlp: non-finite parameter after training");

  MlpRegressor model(p, layout, std::move(best), xs, y_mean, y_scale);
  model.set_history(best_epoch, epoch);
  return model;
}

/// Mean squared error of a trained model on raw (unstandardized) data.
inline double mlp_mse(const MlpRegressor& model, const Matrix& x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double e = model.predict(x.row(i)) - y[i];
    s += e * e;
  }
  return s / double(x.rows());
}

/// Trains one regressor per cfg.l2_grid entry and keeps the one with the
/// lowest validation MSE (earliest entry on ties).
inline MlpRegressor train_mlp_l2_grid(const Matrix& x, std::span<const double> y, const TrainConfig& cfg,
                                      MlpValidation val = {}) {
  if (cfg.l2_grid.empty() || !val.x || val.x->rows() == 0) return train_mlp(x, y, cfg, val);
  std::optional<MlpRegressor> best;
  double best_mse = 0.0;
  for (const double l2 : cfg.l2_grid) {
    if (!(l2 >= 0.0) || !std::isfinite(l2)) throw InvalidArgument("l2_grid: entries must be finite and >= 0");
    TrainConfig c = cfg;
    c.mlp.l2 = l2;
    MlpRegressor m = train_mlp(x, y, c, val);
    const double mse = mlp_mse(m, *val.x, val.y);
    if (!best || mse < best_mse) {
      best = std::move(m);
      best_mse = mse;
    }
  }
  return std::move(*best);
}

}  // namespace mimic
