// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "pcc/geometry.hpp"
#include "pcc/rng.hpp"

namespace pcc {

/// Probability vector over classes; entries are non-negative and sum to one.
using SoftLabel = std::vector<double>;

SoftLabel one_hot(std::size_t label, std::size_t classes);

struct LabeledCloud {
  PointCloud cloud;
  SoftLabel label;
};

/// Mixing weight lambda and the seed of the random choices. When
/// `beta_alpha` is set, lambda is drawn from Beta(alpha, alpha) instead.
struct MixSpec {
  double lambda = 0.5;
  std::uint64_t seed = 0;
  std::optional<double> beta_alpha;
};

/// lambda * a + (1 - lambda) * b.
SoftLabel mix_labels(const SoftLabel& a, const SoftLabel& b, double lambda);

/// floor(lambda n) random points of a with n - floor(lambda n) random points
/// of b; both subsets keep their original order.
LabeledCloud cutmix_r(const LabeledCloud& a, const LabeledCloud& b, const MixSpec& spec);

/// The floor(lambda n)-NN region of a random anchor of a, completed by b's
/// points outside the same-size region around that anchor position (b's
/// points ranked floor(lambda n) .. n-1 by distance to the anchor).
LabeledCloud cutmix_k(const LabeledCloud& a, const LabeledCloud& b, const MixSpec& spec,
                      std::size_t* anchor_out = nullptr);

/// Bijection i -> perm[i] from points of a to points of b.
using Permutation = std::vector<std::size_t>;

inline constexpr std::size_t kExactAssignmentLimit = 256;

/// Minimum squared-distance assignment. Exact (Hungarian) up to 256 points;
/// above that, greedy nearest-available matching refined by pairwise swaps.
Permutation emd_assign(const PointCloud& a, const PointCloud& b);

/// Sum over i of |a_i - b_perm(i)|^2, accumulated in index order.
double assignment_cost(const PointCloud& a, const PointCloud& b, const Permutation& perm);

/// Point i becomes lambda a_i + (1 - lambda) b_perm(i) under emd_assign.
LabeledCloud mixup_emd(const LabeledCloud& a, const LabeledCloud& b, const MixSpec& spec);

struct RsmixDraw {
  std::size_t anchor_a = 0;
  std::size_t anchor_b = 0;
  std::size_t region = 0;
  Vec3 translation = Vec3::Zero();
};

/// Replaces the floor(lambda n)-NN ball of a random anchor of a with the
/// same-size ball of a random anchor of b, translated onto a's anchor.
LabeledCloud rsmix(const LabeledCloud& a, const LabeledCloud& b, const MixSpec& spec, RsmixDraw* draw = nullptr);

enum class AugmentationKind { kNone, kCutmixR, kCutmixK, kMixup, kRsmix };

std::string_view augmentation_name(AugmentationKind kind);
std::optional<AugmentationKind> parse_augmentation(std::string_view name);

LabeledCloud mix(AugmentationKind kind, const LabeledCloud& a, const LabeledCloud& b, const MixSpec& spec);

}  // namespace pcc
