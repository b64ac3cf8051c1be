// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcc/geometry.hpp"
#include "pcc/occlusion.hpp"
#include "pcc/rng.hpp"
#include "pcc/severity_table.hpp"

namespace pcc {

struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::kGaussian;
  int severity = 1;  // 1..5
  std::uint64_t seed = 0;
};

/// Clean input of one sample. `mesh`, when present, is in the same frame as
/// `cloud` and is required by Occlusion and LiDAR.
struct CorruptionInput {
  const PointCloud& cloud;
  const TriangleMesh* mesh = nullptr;
};

struct CorruptionResult {
  PointCloud cloud;
  nlohmann::json provenance;  // drawn parameters: angles, anchors, pose, ...
};

/// Applies one corruption at one severity. The random stream is keyed by
/// (spec.seed, kind, severity, sample_key), so samples are independent and
/// the output is a pure function of the arguments.
CorruptionResult apply_corruption(const CorruptionInput& input, const CorruptionSpec& spec, const SeverityTable& table,
                                  std::uint64_t sample_key = 0, const OcclusionOptions& occlusion = {});
CorruptionResult apply_corruption(const PointCloud& cloud, const CorruptionSpec& spec, const SeverityTable& table,
                                  std::uint64_t sample_key = 0);

enum class NoiseDistribution { kUniform, kGaussian };

/// Per-coordinate U(-scale, scale) or N(0, scale^2) jitter.
PointCloud distribution_noise(const PointCloud& cloud, NoiseDistribution dist, double scale, Rng& rng);

/// `count` distinct points shifted by +-magnitude on every axis (random signs).
PointCloud impulse_noise(const PointCloud& cloud, std::size_t count, double magnitude, Rng& rng,
                         std::vector<std::size_t>* chosen = nullptr);

/// Appends `count` points, each a random anchor plus per-axis U(-bound, bound).
PointCloud upsampling_noise(const PointCloud& cloud, std::size_t count, double bound, Rng& rng);

/// Appends `count` points uniform in [-1, 1]^3.
PointCloud background_noise(const PointCloud& cloud, std::size_t count, Rng& rng);

enum class DensityMode { kIncrease, kDecrease };

/// Record of the clusters a density or cutout corruption touched, in
/// original point indices.
struct ClusterDraw {
  std::vector<std::size_t> anchors;
  std::vector<std::vector<std::size_t>> members;   // kNN set of each anchor
  std::vector<std::vector<std::size_t>> affected;  // removed or duplicated subset
};

/// Picks n_clusters anchors; for each anchor takes its cluster_size-NN set
/// and removes (decrease) or jitter-duplicates with sigma 0.01 (increase)
/// floor(fraction * cluster_size) random members. Decrease draws anchors and
/// neighbors among the points that survived earlier clusters.
PointCloud local_density(const PointCloud& cloud, DensityMode mode, int n_clusters, std::size_t cluster_size,
                         double fraction, Rng& rng, ClusterDraw* draw = nullptr);

inline constexpr double kDensityJitterSigma = 0.01;

/// Removes n_clusters kNN sets of size k, each drawn among surviving points.
PointCloud cutout(const PointCloud& cloud, int n_clusters, std::size_t k, Rng& rng, ClusterDraw* draw = nullptr);

struct RotationDraw {
  Vec3 angles_deg = Vec3::Zero();  // about x, y, z
  Mat3 matrix = Mat3::Identity();  // Rz * Ry * Rx
};

Mat3 rotation_from_angles(const Vec3& angles_deg);

/// Angles about x, y, z drawn from U(-max_angle, max_angle); requires
/// 0 < max_angle <= 15 degrees.
PointCloud random_rotation(const PointCloud& cloud, double max_angle_deg, Rng& rng, RotationDraw* draw = nullptr);

struct ShearDraw {
  double a = 0.0;  // x += a * z
  double b = 0.0;  // y += b * z
};

PointCloud random_shear(const PointCloud& cloud, double max_coeff, Rng& rng, ShearDraw* draw = nullptr);

inline constexpr double kMaxRotationDeg = 15.0;

}  // namespace pcc
