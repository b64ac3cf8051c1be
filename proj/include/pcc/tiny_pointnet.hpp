// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "pcc/augmentation.hpp"
#include "pcc/geometry.hpp"

namespace pcc {

/// Shared per-point layers 3 -> 64 -> 128 -> 256 (each linear + batch norm +
/// ReLU), max-pool over points, head 256 -> 128 (linear + batch norm + ReLU)
/// and a linear classifier to `classes` logits.
struct Architecture {
  std::array<int, 3> point_dims{64, 128, 256};
  int head_dim = 128;
  int classes = 40;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

struct BatchNorm {
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
  Eigen::VectorXd running_mean;
  Eigen::VectorXd running_var;

  BatchNorm() = default;
  explicit BatchNorm(int dim);
};

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

struct NetworkState {
  Architecture arch;
  std::array<Eigen::MatrixXd, 3> point_weights;  // (out x in), no bias: batch norm follows
  std::array<BatchNorm, 3> point_norms;
  Eigen::MatrixXd head_weight;
  BatchNorm head_norm;
  Eigen::MatrixXd out_weight;
  Eigen::VectorXd out_bias;
};

/// He-normal weights, unit gamma, zero beta, zero/one running statistics.
NetworkState init_network(const Architecture& arch, std::uint64_t seed);

/// Same shapes as `like`, every entry zero.
NetworkState zeros_like(const NetworkState& like);

enum class TensorRole { kWeight, kBias, kGamma, kBeta, kRunningMean, kRunningVar };

inline bool is_trainable(TensorRole role) {
  return role != TensorRole::kRunningMean && role != TensorRole::kRunningVar;
}
inline bool is_affine(TensorRole role) { return role == TensorRole::kGamma || role == TensorRole::kBeta; }

/// Visits every tensor in declared (checkpoint) order as f(name, role, tensor),
/// where tensor is an Eigen::MatrixXd or Eigen::VectorXd with the constness
/// of `state`.
template <typename State, typename F>
void for_each_tensor(State& state, F&& f) {
  static constexpr std::string_view kPointNames[3][5] = {
      {"point0.weight", "point0.gamma", "point0.beta", "point0.running_mean", "point0.running_var"},
      {"point1.weight", "point1.gamma", "point1.beta", "point1.running_mean", "point1.running_var"},
      {"point2.weight", "point2.gamma", "point2.beta", "point2.running_mean", "point2.running_var"},
  };
  auto norm = [&](auto& bn, const std::string_view* names) {
    f(names[0], TensorRole::kGamma, bn.gamma);
    f(names[1], TensorRole::kBeta, bn.beta);
    f(names[2], TensorRole::kRunningMean, bn.running_mean);
    f(names[3], TensorRole::kRunningVar, bn.running_var);
  };
  for (int l = 0; l < 3; ++l) {
    f(kPointNames[l][0], TensorRole::kWeight, state.point_weights[l]);
    norm(state.point_norms[l], &kPointNames[l][1]);
  }
  static constexpr std::string_view kHeadNames[4] = {"head.gamma", "head.beta", "head.running_mean", "head.running_var"};
  f(std::string_view("head.weight"), TensorRole::kWeight, state.head_weight);
  norm(state.head_norm, kHeadNames);
  f(std::string_view("out.weight"), TensorRole::kWeight, state.out_weight);
  f(std::string_view("out.bias"), TensorRole::kBias, state.out_bias);
}

std::size_t parameter_count(const NetworkState& state);

enum class Mode {
  kTrain,  // batch statistics; running statistics updated by the caller
  kEval,   // running statistics
  kAdapt,  // batch statistics, population variance, nothing updated
};

struct NormCache {
  Eigen::MatrixXd normalized;  // x-hat
  Eigen::MatrixXd activated;   // ReLU(gamma x-hat + beta)
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd var;      // population variance in batch modes
  Eigen::RowVectorXd inv_std;
};

/// Everything backward() needs. Tied to the exact parameter values it was
/// computed with through `fingerprint`.
struct ForwardCache {
  Mode mode = Mode::kEval;
  std::vector<std::size_t> offsets;  // cloud b owns rows [offsets[b], offsets[b+1])
  Eigen::MatrixXd input;             // N x 3
  std::array<NormCache, 3> point;
  Eigen::MatrixXd pooled;                                      // B x D
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> argmax;  // B x D, global row
  Eigen::MatrixXd head_input;
  NormCache head;
  Eigen::MatrixXd logits;  // B x C
  std::uint64_t fingerprint = 0;
};

std::uint64_t fingerprint(const NetworkState& state);

/// Throws InvalidArgument for an empty batch or an empty cloud, and for a
/// single-cloud batch in a batch-statistics mode.
ForwardCache forward(const NetworkState& state, std::span<const PointCloud> clouds, Mode mode);
Eigen::MatrixXd logits(const NetworkState& state, std::span<const PointCloud> clouds, Mode mode);

struct Gradients {
  NetworkState params;   // running statistics entries stay zero
  Eigen::MatrixXd input;  // N x 3, rows in cache order
};

/// Exact gradients for a loss whose derivative w.r.t. the logits is
/// `dlogits`. Max-pool routes to the first (lowest-index) arg-max point.
/// Throws InvalidArgument when the cache does not match `state`.
Gradients backward(const ForwardCache& cache, const NetworkState& state, const Eigen::MatrixXd& dlogits);

/// Folds the batch statistics of a kTrain cache into the running statistics
/// (unbiased variance, momentum on the new value).
void update_running_stats(NetworkState& state, const ForwardCache& cache, double momentum = kBatchNormMomentum);

struct LossResult {
  double loss = 0.0;        // batch mean
  Eigen::MatrixXd dlogits;  // gradient of the batch mean
};

/// Cross-entropy against (1 - smoothing) on the true class and
/// smoothing / (C - 1) elsewhere; soft labels mix these targets linearly.
LossResult smoothed_cross_entropy(const Eigen::MatrixXd& logits, std::span<const std::size_t> labels, double smoothing);
LossResult smoothed_cross_entropy(const Eigen::MatrixXd& logits, std::span<const SoftLabel> labels, double smoothing);
double loss_smoothed_ce(const Eigen::VectorXd& logits, std::size_t label, double smoothing);

/// Mean Shannon entropy of the softmax predictions.
LossResult mean_entropy(const Eigen::MatrixXd& logits);

Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam moments for every tensor of a NetworkState.
class Adam {
 public:
  Adam(const NetworkState& like, AdamConfig config);

  /// Updates the tensors whose role passes `select` with learning rate `lr`.
  template <typename Select>
  void step(NetworkState& state, const NetworkState& grads, double lr, Select&& select);
  void step(NetworkState& state, const NetworkState& grads, double lr) {
    step(state, grads, lr, [](TensorRole role) { return is_trainable(role); });
  }

 private:
  AdamConfig config_;
  NetworkState m_;
  NetworkState v_;
  long long t_ = 0;
};

struct TrainSample {
  PointCloud cloud;
  std::size_t label = 0;
};

struct TrainConfig {
  int epochs = 50;
  std::size_t batch_size = 32;
  AdamConfig adam;
  double smoothing = 0.2;
  double plateau_threshold = 1e-4;
  int plateau_patience = 10;
  double plateau_factor = 0.5;
  bool translate_scale = true;
  double translate = 0.2;
  double scale_min = 2.0 / 3.0;
  double scale_max = 1.5;
  AugmentationKind augmentation = AugmentationKind::kNone;
  double mix_lambda = 0.5;
  double bn_momentum = kBatchNormMomentum;
  std::size_t train_points = 0;  // per-step random subset size; 0 keeps every point
  std::uint64_t seed = 0;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  NetworkState state;  // best-validation snapshot
  std::vector<EpochStats> history;
  int best_epoch = 0;
};

/// Adam training with smoothed cross-entropy and a plateau rule that scales
/// the learning rate by `plateau_factor` after `plateau_patience` epochs
/// without a validation-loss improvement of `plateau_threshold`. Without a
/// validation set the training loss drives both the plateau rule and the
/// snapshot choice.
TrainResult train(NetworkState state, std::span<const TrainSample> train_set, std::span<const TrainSample> validation,
                  const TrainConfig& config);

/// Per-axis scale U(scale_min, scale_max) then translation U(-t, t).
PointCloud translate_scale(const PointCloud& cloud, double translate, double scale_min, double scale_max, Rng& rng);

std::vector<std::size_t> predict(const NetworkState& state, std::span<const PointCloud> clouds,
                                 std::size_t batch_size = 32);

struct PgdConfig {
  double epsilon = 0.05;
  double step = 0.01;
  int steps = 7;
  double smoothing = 0.0;  // attack loss
  std::uint64_t seed = 0;
};

struct PgdTrace {
  PointCloud start;  // x + U(-eps, eps)
  double start_loss = 0.0;
  double final_loss = 0.0;
};

/// Point-shifting L-infinity PGD in eval mode: random start in the box, then
/// `steps` signed-gradient ascent steps projected back onto the box.
PointCloud pgd_attack(const NetworkState& state, const PointCloud& cloud, std::size_t label, const PgdConfig& config,
                      PgdTrace* trace = nullptr);

/// Running statistics become blend * batch + (1 - blend) * running, with batch
/// statistics from a kAdapt pass. Requires at least two clouds.
NetworkState bn_adapt(const NetworkState& state, std::span<const PointCloud> batch, double blend = 1.0);

struct TentConfig {
  double lr = 1e-3;
  int steps = 1;
};

/// Entropy minimization over gamma and beta with batch statistics, then
/// bn_adapt(blend 1) with the updated affine parameters.
NetworkState tent_adapt(const NetworkState& state, std::span<const PointCloud> batch, const TentConfig& config = {});

// Template definitions.

template <typename Select>
void Adam::step(NetworkState& state, const NetworkState& grads, double lr, Select&& select) {
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  std::vector<double*> params, ms, vs;
  std::vector<const double*> gs;
  std::vector<std::size_t> sizes;
  std::vector<bool> selected;
  for_each_tensor(state, [&](std::string_view, TensorRole role, auto& t) {
    params.push_back(t.data());
    sizes.push_back(static_cast<std::size_t>(t.size()));
    selected.push_back(select(role));
  });
  for_each_tensor(grads, [&](std::string_view, TensorRole, const auto& t) { gs.push_back(t.data()); });
  for_each_tensor(m_, [&](std::string_view, TensorRole, auto& t) { ms.push_back(t.data()); });
  for_each_tensor(v_, [&](std::string_view, TensorRole, auto& t) { vs.push_back(t.data()); });
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!selected[k]) continue;
    for (std::size_t i = 0; i < sizes[k]; ++i) {
      const double g = gs[k][i];
      ms[k][i] = config_.beta1 * ms[k][i] + (1.0 - config_.beta1) * g;
      vs[k][i] = config_.beta2 * vs[k][i] + (1.0 - config_.beta2) * g * g;
      const double mhat = ms[k][i] / bc1;
      const double vhat = vs[k][i] / bc2;
      params[k][i] -= lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
  }
}

}  // namespace pcc
