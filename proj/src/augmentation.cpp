// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcc/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "pcc/errors.hpp"
#include "pcc/knn.hpp"

namespace pcc {
namespace {

void check_pair(const LabeledCloud& a, const LabeledCloud& b) {
  if (a.cloud.size() != b.cloud.size()) {
    throw InvalidArgument("mixed clouds differ in size: " + std::to_string(a.cloud.size()) + " vs " +
                          std::to_string(b.cloud.size()));
  }
  if (a.cloud.empty()) throw InvalidArgument("cannot mix empty clouds");
}

double draw_lambda(const MixSpec& spec, Rng& rng) {
  double lambda = spec.lambda;
  if (spec.beta_alpha) {
    const double x = rng.gamma(*spec.beta_alpha);
    const double y = rng.gamma(*spec.beta_alpha);
    lambda = x / (x + y);
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda must lie in [0, 1]");
  return lambda;
}

std::size_t region_size(double lambda, std::size_t n) {
  return std::min(n, static_cast<std::size_t>(std::floor(lambda * static_cast<double>(n))));
}

double weight_of(std::size_t count, std::size_t n) { return static_cast<double>(count) / static_cast<double>(n); }

double squared_distance(const Vec3& a, const Vec3& b) { return (a - b).squaredNorm(); }

// Shortest augmenting path Hungarian algorithm (Jonker-Volgenant potentials).
Permutation hungarian(const PointCloud& a, const PointCloud& b) {
  const std::size_t n = a.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = squared_distance(a[i0 - 1], b[j - 1]) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Permutation perm(n);
  for (std::size_t j = 1; j <= n; ++j) perm[p[j] - 1] = j - 1;
  return perm;
}

Permutation greedy_with_swaps(const PointCloud& a, const PointCloud& b) {
  const std::size_t n = a.size();
  Permutation perm(n);
  std::vector<bool> taken(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = n;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (taken[j]) continue;
      const double d = squared_distance(a[i], b[j]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    taken[best] = true;
    perm[i] = best;
  }
  constexpr int kMaxPasses = 8;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    bool improved = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = i + 1; k < n; ++k) {
        const double before = squared_distance(a[i], b[perm[i]]) + squared_distance(a[k], b[perm[k]]);
        const double after = squared_distance(a[i], b[perm[k]]) + squared_distance(a[k], b[perm[i]]);
        if (after < before) {
          std::swap(perm[i], perm[k]);
          improved = true;
        }
      }
    }
    if (!improved) break;
  }
  return perm;
}

}  // namespace

SoftLabel one_hot(std::size_t label, std::size_t classes) {
  if (label >= classes) throw InvalidArgument("label " + std::to_string(label) + " out of range");
  SoftLabel y(classes, 0.0);
  y[label] = 1.0;
  return y;
}

SoftLabel mix_labels(const SoftLabel& a, const SoftLabel& b, double lambda) {
  if (a.size() != b.size()) throw InvalidArgument("label vectors differ in class count");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda must lie in [0, 1]");
  SoftLabel out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = lambda * a[i] + (1.0 - lambda) * b[i];
  return out;
}

LabeledCloud cutmix_r(const LabeledCloud& a, const LabeledCloud& b, const MixSpec& spec) {
  check_pair(a, b);
  Rng rng(spec.seed);
  const std::size_t n = a.cloud.size();
  const std::size_t m = region_size(draw_lambda(spec, rng), n);
  auto from_a = rng.sample_without_replacement(n, m);
  auto from_b = rng.sample_without_replacement(n, n - m);
  std::sort(from_a.begin(), from_a.end());
  std::sort(from_b.begin(), from_b.end());
  std::vector<Vec3> points;
  points.reserve(n);
  for (std::size_t i : from_a) points.push_back(a.cloud[i]);
  for (std::size_t i : from_b) points.push_back(b.cloud[i]);
  return {PointCloud(std::move(points)), mix_labels(a.label, b.label, weight_of(m, n))};
}

LabeledCloud cutmix_k(const LabeledCloud& a, const LabeledCloud& b, const MixSpec& spec, std::size_t* anchor_out) {
  check_pair(a, b);
  Rng rng(spec.seed);
  const std::size_t n = a.cloud.size();
  const std::size_t m = region_size(draw_lambda(spec, rng), n);
  const auto anchor = static_cast<std::size_t>(rng.below(n));
  if (anchor_out) *anchor_out = anchor;
  const Vec3 center = a.cloud[anchor];

  std::vector<std::size_t> from_a;
  if (m > 0) {
    for (const Neighbor& nb : KnnIndex(a.cloud).query(center, m)) from_a.push_back(nb.index);
  }
  const auto ranked_b = KnnIndex(b.cloud).query(center, n);
  std::vector<std::size_t> from_b;
  for (std::size_t r = m; r < n; ++r) from_b.push_back(ranked_b[r].index);
  std::sort(from_a.begin(), from_a.end());
  std::sort(from_b.begin(), from_b.end());

  std::vector<Vec3> points;
  points.reserve(n);
  for (std::size_t i : from_a) points.push_back(a.cloud[i]);
  for (std::size_t i : from_b) points.push_back(b.cloud[i]);
  return {PointCloud(std::move(points)), mix_labels(a.label, b.label, weight_of(m, n))};
}

Permutation emd_assign(const PointCloud& a, const PointCloud& b) {
  if (a.size() != b.size()) throw InvalidArgument("assignment needs equal-size clouds");
  if (a.empty()) return {};
  return a.size() <= kExactAssignmentLimit ? hungarian(a, b) : greedy_with_swaps(a, b);
}

double assignment_cost(const PointCloud& a, const PointCloud& b, const Permutation& perm) {
  double cost = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) cost += squared_distance(a[i], b[perm[i]]);
  return cost;
}

LabeledCloud mixup_emd(const LabeledCloud& a, const LabeledCloud& b, const MixSpec& spec) {
  check_pair(a, b);
  Rng rng(spec.seed);
  const double lambda = draw_lambda(spec, rng);
  const Permutation perm = emd_assign(a.cloud, b.cloud);
  std::vector<Vec3> points;
  points.reserve(a.cloud.size());
  for (std::size_t i = 0; i < a.cloud.size(); ++i) points.push_back(lambda * a.cloud[i] + (1.0 - lambda) * b.cloud[perm[i]]);
  return {PointCloud(std::move(points)), mix_labels(a.label, b.label, lambda)};
}

LabeledCloud rsmix(const LabeledCloud& a, const LabeledCloud& b, const MixSpec& spec, RsmixDraw* draw) {
  check_pair(a, b);
  Rng rng(spec.seed);
  const std::size_t n = a.cloud.size();
  const std::size_t m = region_size(draw_lambda(spec, rng), n);
  const auto anchor_a = static_cast<std::size_t>(rng.below(n));
  const auto anchor_b = static_cast<std::size_t>(rng.below(n));
  const Vec3 shift = a.cloud[anchor_a] - b.cloud[anchor_b];
  if (draw) *draw = {anchor_a, anchor_b, m, shift};

  std::vector<bool> removed(n, false);
  std::vector<std::size_t> inserted;
  if (m > 0) {
    for (const Neighbor& nb : KnnIndex(a.cloud).query(a.cloud[anchor_a], m)) removed[nb.index] = true;
    for (const Neighbor& nb : KnnIndex(b.cloud).query(b.cloud[anchor_b], m)) inserted.push_back(nb.index);
    std::sort(inserted.begin(), inserted.end());
  }
  std::vector<Vec3> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!removed[i]) points.push_back(a.cloud[i]);
  for (std::size_t i : inserted) points.push_back(b.cloud[i] + shift);
  return {PointCloud(std::move(points)), mix_labels(a.label, b.label, weight_of(n - m, n))};
}

std::string_view augmentation_name(AugmentationKind kind) {
  switch (kind) {
    case AugmentationKind::kNone: return "none";
    case AugmentationKind::kCutmixR: return "cutmix_r";
    case AugmentationKind::kCutmixK: return "cutmix_k";
    case AugmentationKind::kMixup: return "mixup";
    case AugmentationKind::kRsmix: return "rsmix";
  }
  return "none";
}

std::optional<AugmentationKind> parse_augmentation(std::string_view name) {
  for (auto kind : {AugmentationKind::kNone, AugmentationKind::kCutmixR, AugmentationKind::kCutmixK,
                    AugmentationKind::kMixup, AugmentationKind::kRsmix}) {
    if (augmentation_name(kind) == name) return kind;
  }
  return std::nullopt;
}

LabeledCloud mix(AugmentationKind kind, const LabeledCloud& a, const LabeledCloud& b, const MixSpec& spec) {
  switch (kind) {
    case AugmentationKind::kCutmixR: return cutmix_r(a, b, spec);
    case AugmentationKind::kCutmixK: return cutmix_k(a, b, spec);
    case AugmentationKind::kMixup: return mixup_emd(a, b, spec);
    case AugmentationKind::kRsmix: return rsmix(a, b, spec);
    case AugmentationKind::kNone: break;
  }
  return a;
}

}  // namespace pcc
