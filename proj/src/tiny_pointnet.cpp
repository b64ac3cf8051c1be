// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcc/tiny_pointnet.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "pcc/errors.hpp"
#include "pcc/rng.hpp"

namespace pcc {

BatchNorm::BatchNorm(int dim)
    : gamma(Eigen::VectorXd::Ones(dim)),
      beta(Eigen::VectorXd::Zero(dim)),
      running_mean(Eigen::VectorXd::Zero(dim)),
      running_var(Eigen::VectorXd::Ones(dim)) {}

NetworkState init_network(const Architecture& arch, std::uint64_t seed) {
  if (arch.classes < 2) throw InvalidArgument("classifier needs at least 2 classes");
  Rng rng(seed);
  auto he = [&rng](int out, int in) {
    Eigen::MatrixXd w(out, in);
    const double std = std::sqrt(2.0 / in);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = std * rng.normal();
    return w;
  };
  NetworkState s;
  s.arch = arch;
  int in = 3;
  for (int l = 0; l < 3; ++l) {
    s.point_weights[l] = he(arch.point_dims[l], in);
    s.point_norms[l] = BatchNorm(arch.point_dims[l]);
    in = arch.point_dims[l];
  }
  s.head_weight = he(arch.head_dim, in);
  s.head_norm = BatchNorm(arch.head_dim);
  s.out_weight = he(arch.classes, arch.head_dim);
  s.out_bias = Eigen::VectorXd::Zero(arch.classes);
  return s;
}

NetworkState zeros_like(const NetworkState& like) {
  NetworkState z = like;
  for_each_tensor(z, [](std::string_view, TensorRole, auto& t) { t.setZero(); });
  return z;
}

std::size_t parameter_count(const NetworkState& state) {
  std::size_t n = 0;
  for_each_tensor(state, [&](std::string_view, TensorRole role, const auto& t) {
    if (is_trainable(role)) n += static_cast<std::size_t>(t.size());
  });
  return n;
}

std::uint64_t fingerprint(const NetworkState& state) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for_each_tensor(state, [&](std::string_view, TensorRole, const auto& t) {
    h = (h ^ static_cast<std::uint64_t>(t.size())) * 0x100000001b3ULL;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      h = (h ^ std::bit_cast<std::uint64_t>(t.data()[i])) * 0x100000001b3ULL;
      h ^= h >> 31;
    }
  });
  return h;
}

namespace {

bool uses_batch_stats(Mode mode) { return mode != Mode::kEval; }

NormCache norm_forward(const Eigen::MatrixXd& z, const BatchNorm& bn, Mode mode) {
  NormCache c;
  if (uses_batch_stats(mode)) {
    if (z.rows() < 2) throw InvalidArgument("batch statistics need at least two rows");
    c.mean = z.colwise().mean();
    c.var = (z.rowwise() - c.mean).array().square().colwise().mean();
  } else {
    c.mean = bn.running_mean.transpose();
    c.var = bn.running_var.transpose();
  }
  c.inv_std = (c.var.array() + kBatchNormEpsilon).rsqrt();
  c.normalized = ((z.rowwise() - c.mean).array().rowwise() * c.inv_std.array()).matrix();
  c.activated = ((c.normalized.array().rowwise() * bn.gamma.transpose().array()).rowwise() +
                 bn.beta.transpose().array())
                    .cwiseMax(0.0)
                    .matrix();
  return c;
}

// Returns dL/dz given dL/d(activated); accumulates gamma/beta gradients.
Eigen::MatrixXd norm_backward(const NormCache& c, const BatchNorm& bn, Mode mode, const Eigen::MatrixXd& dact,
                              BatchNorm& grad) {
  const Eigen::MatrixXd dy = (c.activated.array() > 0.0).select(dact, 0.0);
  grad.gamma = (dy.array() * c.normalized.array()).colwise().sum().transpose();
  grad.beta = dy.colwise().sum().transpose();
  const Eigen::ArrayXXd dxhat = dy.array().rowwise() * bn.gamma.transpose().array();
  if (!uses_batch_stats(mode)) return (dxhat.rowwise() * c.inv_std.array()).matrix();
  const double n = static_cast<double>(dy.rows());
  const Eigen::RowVectorXd sum1 = dxhat.colwise().sum().matrix();
  const Eigen::RowVectorXd sum2 = (dxhat * c.normalized.array()).colwise().sum().matrix();
  Eigen::ArrayXXd dz = n * dxhat;
  dz.rowwise() -= sum1.array();
  dz -= c.normalized.array().rowwise() * sum2.array();
  dz.rowwise() *= (c.inv_std.array() / n);
  return dz.matrix();
}

ForwardCache forward_impl(const NetworkState& state, std::span<const PointCloud> clouds, Mode mode, bool keep_all) {
  if (clouds.empty()) throw InvalidArgument("forward needs at least one cloud");
  if (uses_batch_stats(mode) && clouds.size() < 2) {
    throw InvalidArgument("batch-statistics modes need at least two clouds");
  }
  ForwardCache c;
  c.mode = mode;
  c.offsets.resize(clouds.size() + 1, 0);
  for (std::size_t b = 0; b < clouds.size(); ++b) {
    if (clouds[b].empty()) throw InvalidArgument("cloud " + std::to_string(b) + " is empty");
    c.offsets[b + 1] = c.offsets[b] + clouds[b].size();
  }
  const auto n = static_cast<Eigen::Index>(c.offsets.back());
  c.input.resize(n, 3);
  for (std::size_t b = 0; b < clouds.size(); ++b) {
    for (std::size_t i = 0; i < clouds[b].size(); ++i) {
      c.input.row(static_cast<Eigen::Index>(c.offsets[b] + i)) = clouds[b][i].transpose();
    }
  }

  const Eigen::MatrixXd* a = &c.input;
  for (int l = 0; l < 3; ++l) {
    const Eigen::MatrixXd z = (*a) * state.point_weights[l].transpose();
    c.point[l] = norm_forward(z, state.point_norms[l], mode);
    a = &c.point[l].activated;
  }

  const auto batch = static_cast<Eigen::Index>(clouds.size());
  const Eigen::Index dim = a->cols();
  c.pooled.resize(batch, dim);
  c.argmax.resize(batch, dim);
  for (Eigen::Index b = 0; b < batch; ++b) {
    const auto begin = static_cast<Eigen::Index>(c.offsets[b]);
    const auto end = static_cast<Eigen::Index>(c.offsets[b + 1]);
    for (Eigen::Index d = 0; d < dim; ++d) {
      Eigen::Index best = begin;
      double best_v = (*a)(begin, d);
      for (Eigen::Index r = begin + 1; r < end; ++r) {
        if ((*a)(r, d) > best_v) {
          best_v = (*a)(r, d);
          best = r;
        }
      }
      c.pooled(b, d) = best_v;
      c.argmax(b, d) = best;
    }
  }

  const Eigen::MatrixXd zh = c.pooled * state.head_weight.transpose();
  c.head = norm_forward(zh, state.head_norm, mode);
  c.logits = (c.head.activated * state.out_weight.transpose()).rowwise() + state.out_bias.transpose();
  if (keep_all) c.fingerprint = fingerprint(state);
  return c;
}

}  // namespace

ForwardCache forward(const NetworkState& state, std::span<const PointCloud> clouds, Mode mode) {
  return forward_impl(state, clouds, mode, true);
}

namespace {

// Eval-mode batch norm is affine, so it folds into a scale and shift per
// feature; running one cloud at a time keeps the activations in cache.
struct FoldedNorm {
  Eigen::RowVectorXd scale;
  Eigen::RowVectorXd shift;
};

FoldedNorm fold(const BatchNorm& bn) {
  const Eigen::ArrayXd inv_std = (bn.running_var.array() + kBatchNormEpsilon).rsqrt();
  const Eigen::ArrayXd scale = bn.gamma.array() * inv_std;
  return {scale.matrix().transpose(), (bn.beta.array() - bn.running_mean.array() * scale).matrix().transpose()};
}

Eigen::MatrixXd eval_logits(const NetworkState& state, std::span<const PointCloud> clouds) {
  std::array<FoldedNorm, 3> norms;
  for (int l = 0; l < 3; ++l) norms[l] = fold(state.point_norms[l]);
  Eigen::MatrixXd pooled(static_cast<Eigen::Index>(clouds.size()), state.point_weights[2].rows());
  Eigen::MatrixXd a;
  for (std::size_t b = 0; b < clouds.size(); ++b) {
    if (clouds[b].empty()) throw InvalidArgument("cloud " + std::to_string(b) + " is empty");
    a.resize(static_cast<Eigen::Index>(clouds[b].size()), 3);
    for (std::size_t i = 0; i < clouds[b].size(); ++i) a.row(static_cast<Eigen::Index>(i)) = clouds[b][i].transpose();
    for (int l = 0; l < 3; ++l) {
      Eigen::MatrixXd z = a * state.point_weights[l].transpose();
      z.array().rowwise() *= norms[l].scale.array();
      z.array().rowwise() += norms[l].shift.array();
      a = z.cwiseMax(0.0);
    }
    pooled.row(static_cast<Eigen::Index>(b)) = a.colwise().maxCoeff();
  }
  const FoldedNorm head = fold(state.head_norm);
  Eigen::MatrixXd h = pooled * state.head_weight.transpose();
  h.array().rowwise() *= head.scale.array();
  h.array().rowwise() += head.shift.array();
  h = h.cwiseMax(0.0);
  return (h * state.out_weight.transpose()).rowwise() + state.out_bias.transpose();
}

}  // namespace

Eigen::MatrixXd logits(const NetworkState& state, std::span<const PointCloud> clouds, Mode mode) {
  if (mode == Mode::kEval) {
    if (clouds.empty()) throw InvalidArgument("forward needs at least one cloud");
    return eval_logits(state, clouds);
  }
  return forward_impl(state, clouds, mode, false).logits;
}

Gradients backward(const ForwardCache& cache, const NetworkState& state, const Eigen::MatrixXd& dlogits) {
  if (cache.fingerprint != fingerprint(state)) {
    throw InvalidArgument("stale forward cache: parameters changed since forward()");
  }
  if (dlogits.rows() != cache.logits.rows() || dlogits.cols() != cache.logits.cols()) {
    throw InvalidArgument("logit gradient shape does not match the forward pass");
  }
  Gradients g{zeros_like(state), Eigen::MatrixXd()};

  g.params.out_weight = dlogits.transpose() * cache.head.activated;
  g.params.out_bias = dlogits.colwise().sum().transpose();
  const Eigen::MatrixXd dhead_act = dlogits * state.out_weight;
  const Eigen::MatrixXd dzh = norm_backward(cache.head, state.head_norm, cache.mode, dhead_act, g.params.head_norm);
  g.params.head_weight = dzh.transpose() * cache.pooled;
  const Eigen::MatrixXd dpooled = dzh * state.head_weight;

  Eigen::MatrixXd dact = Eigen::MatrixXd::Zero(cache.point[2].activated.rows(), cache.point[2].activated.cols());
  for (Eigen::Index b = 0; b < dpooled.rows(); ++b)
    for (Eigen::Index d = 0; d < dpooled.cols(); ++d) dact(cache.argmax(b, d), d) += dpooled(b, d);

  for (int l = 2; l >= 0; --l) {
    const Eigen::MatrixXd dz = norm_backward(cache.point[l], state.point_norms[l], cache.mode, dact, g.params.point_norms[l]);
    const Eigen::MatrixXd& a_prev = l == 0 ? cache.input : cache.point[l - 1].activated;
    g.params.point_weights[l] = dz.transpose() * a_prev;
    dact = dz * state.point_weights[l];
  }
  g.input = std::move(dact);
  return g;
}

void update_running_stats(NetworkState& state, const ForwardCache& cache, double momentum) {
  if (cache.mode != Mode::kTrain) throw InvalidArgument("running statistics update needs a training-mode pass");
  auto fold = [momentum](BatchNorm& bn, const NormCache& c, double rows) {
    const double unbias = rows / (rows - 1.0);
    bn.running_mean = (1.0 - momentum) * bn.running_mean + momentum * c.mean.transpose();
    bn.running_var = (1.0 - momentum) * bn.running_var + momentum * unbias * c.var.transpose();
  };
  for (int l = 0; l < 3; ++l) fold(state.point_norms[l], cache.point[l], static_cast<double>(cache.input.rows()));
  fold(state.head_norm, cache.head, static_cast<double>(cache.logits.rows()));
}

Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits.colwise() - logits.rowwise().maxCoeff();
  p = p.array().exp().matrix();
  p = p.array().colwise() / p.rowwise().sum().array();
  return p;
}

namespace {

Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
  const Eigen::VectorXd mx = logits.rowwise().maxCoeff();
  Eigen::MatrixXd shifted = logits.colwise() - mx;
  const Eigen::VectorXd lse = shifted.array().exp().rowwise().sum().log();
  return shifted.colwise() - lse;
}

LossResult cross_entropy_targets(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& targets) {
  const Eigen::MatrixXd logp = log_softmax(logits);
  const double b = static_cast<double>(logits.rows());
  LossResult r;
  r.loss = -(targets.array() * logp.array()).sum() / b;
  r.dlogits = (logp.array().exp().matrix() - targets) / b;
  return r;
}

void check_smoothing(double smoothing, Eigen::Index classes) {
  if (!(smoothing >= 0.0 && smoothing < 1.0)) throw InvalidArgument("label smoothing must lie in [0, 1)");
  if (classes < 2) throw InvalidArgument("loss needs at least 2 classes");
}

}  // namespace

LossResult smoothed_cross_entropy(const Eigen::MatrixXd& logits, std::span<const std::size_t> labels, double smoothing) {
  check_smoothing(smoothing, logits.cols());
  if (labels.size() != static_cast<std::size_t>(logits.rows())) throw InvalidArgument("one label per logit row required");
  const double off = smoothing / static_cast<double>(logits.cols() - 1);
  Eigen::MatrixXd t = Eigen::MatrixXd::Constant(logits.rows(), logits.cols(), off);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= static_cast<std::size_t>(logits.cols())) {
      throw InvalidArgument("class index " + std::to_string(labels[i]) + " out of range");
    }
    t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(labels[i])) = 1.0 - smoothing;
  }
  return cross_entropy_targets(logits, t);
}

LossResult smoothed_cross_entropy(const Eigen::MatrixXd& logits, std::span<const SoftLabel> labels, double smoothing) {
  check_smoothing(smoothing, logits.cols());
  if (labels.size() != static_cast<std::size_t>(logits.rows())) throw InvalidArgument("one label per logit row required");
  const double off = smoothing / static_cast<double>(logits.cols() - 1);
  Eigen::MatrixXd t(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].size() != static_cast<std::size_t>(logits.cols())) throw InvalidArgument("soft label has wrong class count");
    for (Eigen::Index k = 0; k < logits.cols(); ++k) {
      const double y = labels[i][static_cast<std::size_t>(k)];
      t(static_cast<Eigen::Index>(i), k) = (1.0 - smoothing) * y + off * (1.0 - y);
    }
  }
  return cross_entropy_targets(logits, t);
}

double loss_smoothed_ce(const Eigen::VectorXd& logits, std::size_t label, double smoothing) {
  const std::size_t labels[1] = {label};
  return smoothed_cross_entropy(Eigen::MatrixXd(logits.transpose()), std::span<const std::size_t>(labels), smoothing).loss;
}

LossResult mean_entropy(const Eigen::MatrixXd& logits) {
  const Eigen::MatrixXd logp = log_softmax(logits);
  const Eigen::MatrixXd p = logp.array().exp().matrix();
  const Eigen::VectorXd h = -(p.array() * logp.array()).rowwise().sum();
  const double b = static_cast<double>(logits.rows());
  LossResult r;
  r.loss = h.sum() / b;
  r.dlogits = (-(p.array() * (logp.array().colwise() + h.array()))).matrix() / b;
  return r;
}

Adam::Adam(const NetworkState& like, AdamConfig config) : config_(config), m_(zeros_like(like)), v_(zeros_like(like)) {}

PointCloud translate_scale(const PointCloud& cloud, double translate, double scale_min, double scale_max, Rng& rng) {
  Vec3 scale, shift;
  for (int k = 0; k < 3; ++k) scale[k] = rng.uniform(scale_min, scale_max);
  for (int k = 0; k < 3; ++k) shift[k] = rng.uniform(-translate, translate);
  std::vector<Vec3> out;
  out.reserve(cloud.size());
  for (const Vec3& p : cloud) out.push_back(p.cwiseProduct(scale) + shift);
  return PointCloud(std::move(out));
}

std::vector<std::size_t> predict(const NetworkState& state, std::span<const PointCloud> clouds, std::size_t batch_size) {
  std::vector<std::size_t> out;
  out.reserve(clouds.size());
  batch_size = std::max<std::size_t>(1, batch_size);
  for (std::size_t start = 0; start < clouds.size(); start += batch_size) {
    const std::size_t count = std::min(batch_size, clouds.size() - start);
    const Eigen::MatrixXd z = logits(state, clouds.subspan(start, count), Mode::kEval);
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      Eigen::Index best = 0;
      z.row(r).maxCoeff(&best);
      out.push_back(static_cast<std::size_t>(best));
    }
  }
  return out;
}

namespace {

struct EvalSummary {
  double loss = 0.0;
  double accuracy = 0.0;
};

EvalSummary evaluate(const NetworkState& state, std::span<const TrainSample> samples, double smoothing,
                     std::size_t batch_size) {
  EvalSummary s;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < samples.size(); start += batch_size) {
    const std::size_t count = std::min(batch_size, samples.size() - start);
    std::vector<PointCloud> clouds;
    std::vector<std::size_t> labels;
    for (std::size_t i = start; i < start + count; ++i) {
      clouds.push_back(samples[i].cloud);
      labels.push_back(samples[i].label);
    }
    const Eigen::MatrixXd z = logits(state, clouds, Mode::kEval);
    s.loss += smoothed_cross_entropy(z, labels, smoothing).loss * static_cast<double>(count);
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      Eigen::Index best = 0;
      z.row(r).maxCoeff(&best);
      if (static_cast<std::size_t>(best) == labels[static_cast<std::size_t>(r)]) ++correct;
    }
  }
  s.loss /= static_cast<double>(samples.size());
  s.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
  return s;
}

PointCloud subsample(const PointCloud& cloud, std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx = rng.sample_without_replacement(cloud.size(), n);
  std::sort(idx.begin(), idx.end());
  std::vector<Vec3> out;
  out.reserve(n);
  for (std::size_t i : idx) out.push_back(cloud[i]);
  return PointCloud(std::move(out));
}

}  // namespace

TrainResult train(NetworkState state, std::span<const TrainSample> train_set, std::span<const TrainSample> validation,
                  const TrainConfig& config) {
  if (config.batch_size < 2) throw InvalidArgument("batch size must be at least 2");
  if (train_set.size() < config.batch_size) {
    throw InvalidArgument("dataset of " + std::to_string(train_set.size()) + " samples is smaller than batch size " +
                          std::to_string(config.batch_size));
  }
  if (!(config.adam.lr >= 0.0)) throw InvalidArgument("learning rate must be non-negative");
  const auto classes = static_cast<std::size_t>(state.arch.classes);
  std::vector<bool> seen(classes, false);
  for (const TrainSample& s : train_set) {
    if (s.label >= classes) throw InvalidArgument("label " + std::to_string(s.label) + " out of range");
    seen[s.label] = true;
  }
  if (std::count(seen.begin(), seen.end(), true) < 2) throw InvalidArgument("training needs at least 2 classes present");

  Rng rng(config.seed);
  Adam adam(state, config.adam);
  double lr = config.adam.lr;
  TrainResult result;
  result.state = state;
  double best_monitor = std::numeric_limits<double>::infinity();
  double best_accuracy = -1.0;
  double best_snapshot_loss = std::numeric_limits<double>::infinity();
  int stale = 0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      if (count < 2) continue;
      std::vector<PointCloud> clouds;
      std::vector<SoftLabel> labels;
      clouds.reserve(count);
      for (std::size_t k = start; k < start + count; ++k) {
        const TrainSample& s = train_set[order[k]];
        PointCloud c = config.train_points > 0 && config.train_points < s.cloud.size()
                           ? subsample(s.cloud, config.train_points, rng)
                           : s.cloud;
        if (config.translate_scale) c = translate_scale(c, config.translate, config.scale_min, config.scale_max, rng);
        clouds.push_back(std::move(c));
        labels.push_back(one_hot(s.label, classes));
      }
      if (config.augmentation != AugmentationKind::kNone) {
        std::vector<std::size_t> partner(count);
        std::iota(partner.begin(), partner.end(), std::size_t{0});
        for (std::size_t i = count; i > 1; --i) std::swap(partner[i - 1], partner[rng.below(i)]);
        std::vector<PointCloud> mixed_clouds;
        std::vector<SoftLabel> mixed_labels;
        for (std::size_t i = 0; i < count; ++i) {
          MixSpec spec;
          spec.lambda = config.mix_lambda;
          spec.seed = rng.next();
          LabeledCloud m = mix(config.augmentation, {clouds[i], labels[i]}, {clouds[partner[i]], labels[partner[i]]}, spec);
          mixed_clouds.push_back(std::move(m.cloud));
          mixed_labels.push_back(std::move(m.label));
        }
        clouds = std::move(mixed_clouds);
        labels = std::move(mixed_labels);
      }
      const ForwardCache cache = forward(state, clouds, Mode::kTrain);
      const LossResult loss = smoothed_cross_entropy(cache.logits, std::span<const SoftLabel>(labels), config.smoothing);
      const Gradients grads = backward(cache, state, loss.dlogits);
      adam.step(state, grads.params, lr);
      update_running_stats(state, cache, config.bn_momentum);
      loss_sum += loss.loss;
      ++loss_count;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(std::max<std::size_t>(1, loss_count));
    stats.lr = lr;
    double monitor = stats.train_loss;
    bool better = false;
    if (!validation.empty()) {
      const EvalSummary v = evaluate(state, validation, config.smoothing, config.batch_size);
      stats.val_loss = v.loss;
      stats.val_accuracy = v.accuracy;
      monitor = v.loss;
      better = v.accuracy > best_accuracy || (v.accuracy == best_accuracy && v.loss < best_snapshot_loss);
      if (better) {
        best_accuracy = v.accuracy;
        best_snapshot_loss = v.loss;
      }
    } else {
      better = monitor < best_snapshot_loss;
      if (better) best_snapshot_loss = monitor;
    }
    if (better) {
      result.state = state;
      result.best_epoch = epoch;
    }
    if (monitor < best_monitor - config.plateau_threshold) {
      best_monitor = monitor;
      stale = 0;
    } else if (++stale >= config.plateau_patience) {
      lr *= config.plateau_factor;
      stale = 0;
    }
    result.history.push_back(stats);
  }
  if (result.best_epoch == 0) result.state = state;
  return result;
}

namespace {

// Clamps v to [x - eps, x + eps] so that the computed |v - x| never exceeds
// eps; x + eps itself can round past the ball.
double project_box(double v, double x, double eps) {
  v = std::clamp(v, x - eps, x + eps);
  while (v - x > eps) v = std::nextafter(v, x);
  while (x - v > eps) v = std::nextafter(v, x);
  return v;
}

}  // namespace

PointCloud pgd_attack(const NetworkState& state, const PointCloud& cloud, std::size_t label, const PgdConfig& config,
                      PgdTrace* trace) {
  if (config.steps < 1) throw InvalidArgument("PGD needs at least one step");
  if (!(config.step > 0.0 && config.step <= config.epsilon)) throw InvalidArgument("PGD requires 0 < alpha <= epsilon");
  Rng rng(config.seed);
  const std::size_t labels[1] = {label};
  std::vector<Vec3> x(cloud.begin(), cloud.end());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (int k = 0; k < 3; ++k)
      x[i][k] = project_box(x[i][k] + rng.uniform(-config.epsilon, config.epsilon), cloud[i][k], config.epsilon);

  auto loss_at = [&](const std::vector<Vec3>& pts, Gradients* grads) {
    const PointCloud current(pts);
    const ForwardCache cache = forward(state, std::span<const PointCloud>(&current, 1), Mode::kEval);
    const LossResult loss = smoothed_cross_entropy(cache.logits, std::span<const std::size_t>(labels), config.smoothing);
    if (grads) *grads = backward(cache, state, loss.dlogits);
    return loss.loss;
  };

  if (trace) trace->start = PointCloud(x);
  for (int s = 0; s < config.steps; ++s) {
    Gradients g;
    const double loss = loss_at(x, &g);
    if (s == 0 && trace) trace->start_loss = loss;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (int k = 0; k < 3; ++k) {
        const double grad = g.input(static_cast<Eigen::Index>(i), k);
        const double sign = grad > 0.0 ? 1.0 : (grad < 0.0 ? -1.0 : 0.0);
        x[i][k] = project_box(x[i][k] + config.step * sign, cloud[i][k], config.epsilon);
      }
    }
  }
  if (trace) trace->final_loss = loss_at(x, nullptr);
  return PointCloud(std::move(x));
}

NetworkState bn_adapt(const NetworkState& state, std::span<const PointCloud> batch, double blend) {
  if (batch.size() < 2) throw InvalidArgument("batch-norm adaptation needs at least two clouds");
  if (!(blend >= 0.0 && blend <= 1.0)) throw InvalidArgument("blend must lie in [0, 1]");
  const ForwardCache cache = forward_impl(state, batch, Mode::kAdapt, false);
  NetworkState out = state;
  auto fold = [blend](BatchNorm& bn, const NormCache& c) {
    if (blend == 1.0) {
      bn.running_mean = c.mean.transpose();
      bn.running_var = c.var.transpose();
    } else {
      bn.running_mean = blend * c.mean.transpose() + (1.0 - blend) * bn.running_mean;
      bn.running_var = blend * c.var.transpose() + (1.0 - blend) * bn.running_var;
    }
  };
  for (int l = 0; l < 3; ++l) fold(out.point_norms[l], cache.point[l]);
  fold(out.head_norm, cache.head);
  return out;
}

NetworkState tent_adapt(const NetworkState& state, std::span<const PointCloud> batch, const TentConfig& config) {
  if (batch.size() < 2) throw InvalidArgument("TENT needs at least two clouds");
  if (config.steps < 0) throw InvalidArgument("TENT step count must be non-negative");
  NetworkState s = state;
  Adam adam(s, AdamConfig{config.lr, 0.9, 0.999, 1e-8});
  for (int step = 0; step < config.steps; ++step) {
    const ForwardCache cache = forward(s, batch, Mode::kAdapt);
    const LossResult entropy = mean_entropy(cache.logits);
    const Gradients g = backward(cache, s, entropy.dlogits);
    adam.step(s, g.params, config.lr, [](TensorRole role) { return is_affine(role); });
  }
  return bn_adapt(s, batch, 1.0);
}

}  // namespace pcc
