// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcc/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pcc/deformation.hpp"
#include "pcc/errors.hpp"
#include "pcc/knn.hpp"

namespace pcc {
namespace {

std::vector<Vec3> copy_points(const PointCloud& cloud) { return {cloud.begin(), cloud.end()}; }

nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

}  // namespace

PointCloud distribution_noise(const PointCloud& cloud, NoiseDistribution dist, double scale, Rng& rng) {
  if (!(scale > 0.0)) throw InvalidArgument("noise scale must be positive");
  std::vector<Vec3> out = copy_points(cloud);
  for (Vec3& p : out) {
    for (int k = 0; k < 3; ++k) {
      p[k] += dist == NoiseDistribution::kUniform ? rng.uniform(-scale, scale) : scale * rng.normal();
    }
  }
  return PointCloud(std::move(out));
}

PointCloud impulse_noise(const PointCloud& cloud, std::size_t count, double magnitude, Rng& rng,
                         std::vector<std::size_t>* chosen) {
  if (count > cloud.size()) {
    throw InvalidArgument("impulse count " + std::to_string(count) + " exceeds cloud size " +
                          std::to_string(cloud.size()));
  }
  std::vector<Vec3> out = copy_points(cloud);
  const auto picks = rng.sample_without_replacement(cloud.size(), count);
  for (std::size_t i : picks) {
    for (int k = 0; k < 3; ++k) out[i][k] += rng.coin() ? magnitude : -magnitude;
  }
  if (chosen) *chosen = picks;
  return PointCloud(std::move(out));
}

PointCloud upsampling_noise(const PointCloud& cloud, std::size_t count, double bound, Rng& rng) {
  if (cloud.empty()) throw InvalidArgument("cannot upsample an empty cloud");
  if (count == 0) throw InvalidArgument("upsampling count must be positive");
  std::vector<Vec3> out = copy_points(cloud);
  out.reserve(cloud.size() + count);
  for (std::size_t i = 0; i < count; ++i) {
    const Vec3& anchor = cloud[static_cast<std::size_t>(rng.below(cloud.size()))];
    Vec3 p = anchor;
    for (int k = 0; k < 3; ++k) p[k] += rng.uniform(-bound, bound);
    out.push_back(p);
  }
  return PointCloud(std::move(out));
}

PointCloud background_noise(const PointCloud& cloud, std::size_t count, Rng& rng) {
  if (cloud.empty()) throw InvalidArgument("background noise needs a non-empty cloud");
  if (count == 0) throw InvalidArgument("background count must be positive");
  std::vector<Vec3> out = copy_points(cloud);
  out.reserve(cloud.size() + count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    const double y = rng.uniform(-1.0, 1.0);
    const double z = rng.uniform(-1.0, 1.0);
    out.emplace_back(x, y, z);
  }
  return PointCloud(std::move(out));
}

namespace {

// Removes clusters sequentially; each anchor and its kNN set come from the
// points that are still present. Returns surviving original indices.
std::vector<std::size_t> remove_clusters(const PointCloud& cloud, int n_clusters, std::size_t neighborhood,
                                         double keep_fraction_removed, Rng& rng, ClusterDraw* draw) {
  std::vector<std::size_t> alive(cloud.size());
  for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;
  for (int c = 0; c < n_clusters; ++c) {
    if (neighborhood >= alive.size()) {
      throw InvalidArgument("cluster size " + std::to_string(neighborhood) + " leaves no points among " +
                            std::to_string(alive.size()) + " survivors");
    }
    std::vector<Vec3> survivors;
    survivors.reserve(alive.size());
    for (std::size_t i : alive) survivors.push_back(cloud[i]);
    const KnnIndex index(std::move(survivors));
    const std::size_t anchor_pos = static_cast<std::size_t>(rng.below(alive.size()));
    const auto neighbors = index.query(index.point(anchor_pos), neighborhood);

    std::vector<std::size_t> members;
    members.reserve(neighbors.size());
    for (const Neighbor& nb : neighbors) members.push_back(nb.index);  // positions in `alive`
    const auto drop_count = static_cast<std::size_t>(std::floor(keep_fraction_removed * neighborhood));
    std::vector<std::size_t> dropped_pos;
    if (drop_count == members.size()) {
      dropped_pos = members;
    } else {
      for (std::size_t pick : rng.sample_without_replacement(members.size(), drop_count)) {
        dropped_pos.push_back(members[pick]);
      }
    }

    if (draw) {
      draw->anchors.push_back(alive[anchor_pos]);
      std::vector<std::size_t> original_members, original_dropped;
      for (std::size_t m : members) original_members.push_back(alive[m]);
      for (std::size_t d : dropped_pos) original_dropped.push_back(alive[d]);
      draw->members.push_back(std::move(original_members));
      draw->affected.push_back(std::move(original_dropped));
    }
    std::vector<bool> remove(alive.size(), false);
    for (std::size_t d : dropped_pos) remove[d] = true;
    std::vector<std::size_t> next;
    next.reserve(alive.size() - dropped_pos.size());
    for (std::size_t i = 0; i < alive.size(); ++i)
      if (!remove[i]) next.push_back(alive[i]);
    alive = std::move(next);
  }
  return alive;
}

PointCloud gather(const PointCloud& cloud, const std::vector<std::size_t>& indices) {
  std::vector<Vec3> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(cloud[i]);
  return PointCloud(std::move(out));
}

}  // namespace

PointCloud local_density(const PointCloud& cloud, DensityMode mode, int n_clusters, std::size_t cluster_size,
                         double fraction, Rng& rng, ClusterDraw* draw) {
  if (n_clusters < 1) throw InvalidArgument("at least one cluster required");
  if (cluster_size == 0 || cluster_size > cloud.size()) {
    throw InvalidArgument("cluster size " + std::to_string(cluster_size) + " exceeds cloud size " +
                          std::to_string(cloud.size()));
  }
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw InvalidArgument("density fraction must lie in [0, 1]");
  if (mode == DensityMode::kDecrease) {
    return gather(cloud, remove_clusters(cloud, n_clusters, cluster_size, fraction, rng, draw));
  }

  const KnnIndex index(cloud);
  const auto add_count = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(cluster_size)));
  std::vector<Vec3> out = copy_points(cloud);
  out.reserve(cloud.size() + static_cast<std::size_t>(n_clusters) * add_count);
  for (int c = 0; c < n_clusters; ++c) {
    const auto anchor = static_cast<std::size_t>(rng.below(cloud.size()));
    const auto neighbors = index.query(cloud[anchor], cluster_size);
    const auto picks = rng.sample_without_replacement(neighbors.size(), add_count);
    std::vector<std::size_t> members, duplicated;
    for (const Neighbor& nb : neighbors) members.push_back(nb.index);
    for (std::size_t pick : picks) {
      const std::size_t src = neighbors[pick].index;
      Vec3 p = cloud[src];
      for (int k = 0; k < 3; ++k) p[k] += kDensityJitterSigma * rng.normal();
      out.push_back(p);
      duplicated.push_back(src);
    }
    if (draw) {
      draw->anchors.push_back(anchor);
      draw->members.push_back(std::move(members));
      draw->affected.push_back(std::move(duplicated));
    }
  }
  return PointCloud(std::move(out));
}

PointCloud cutout(const PointCloud& cloud, int n_clusters, std::size_t k, Rng& rng, ClusterDraw* draw) {
  if (n_clusters < 1) throw InvalidArgument("at least one cluster required");
  if (k == 0 || k >= cloud.size()) {
    throw InvalidArgument("cutout k=" + std::to_string(k) + " must be below cloud size " + std::to_string(cloud.size()));
  }
  return gather(cloud, remove_clusters(cloud, n_clusters, k, 1.0, rng, draw));
}

Mat3 rotation_from_angles(const Vec3& angles_deg) {
  const Vec3 r = angles_deg * (std::numbers::pi / 180.0);
  Mat3 rx, ry, rz;
  rx << 1, 0, 0, 0, std::cos(r.x()), -std::sin(r.x()), 0, std::sin(r.x()), std::cos(r.x());
  ry << std::cos(r.y()), 0, std::sin(r.y()), 0, 1, 0, -std::sin(r.y()), 0, std::cos(r.y());
  rz << std::cos(r.z()), -std::sin(r.z()), 0, std::sin(r.z()), std::cos(r.z()), 0, 0, 0, 1;
  return rz * ry * rx;
}

PointCloud random_rotation(const PointCloud& cloud, double max_angle_deg, Rng& rng, RotationDraw* draw) {
  if (!(max_angle_deg > 0.0 && max_angle_deg <= kMaxRotationDeg)) {
    throw InvalidArgument("rotation bound must lie in (0, 15] degrees");
  }
  Vec3 angles;
  for (int k = 0; k < 3; ++k) angles[k] = rng.uniform(-max_angle_deg, max_angle_deg);
  const Mat3 rot = rotation_from_angles(angles);
  std::vector<Vec3> out;
  out.reserve(cloud.size());
  for (const Vec3& p : cloud) out.push_back(rot * p);
  if (draw) *draw = {angles, rot};
  return PointCloud(std::move(out));
}

PointCloud random_shear(const PointCloud& cloud, double max_coeff, Rng& rng, ShearDraw* draw) {
  if (!(max_coeff > 0.0)) throw InvalidArgument("shear bound must be positive");
  ShearDraw s;
  s.a = rng.uniform(-max_coeff, max_coeff);
  s.b = rng.uniform(-max_coeff, max_coeff);
  std::vector<Vec3> out;
  out.reserve(cloud.size());
  for (const Vec3& p : cloud) out.emplace_back(p.x() + s.a * p.z(), p.y() + s.b * p.z(), p.z());
  if (draw) *draw = s;
  return PointCloud(std::move(out));
}

CorruptionResult apply_corruption(const PointCloud& cloud, const CorruptionSpec& spec, const SeverityTable& table,
                                  std::uint64_t sample_key) {
  return apply_corruption(CorruptionInput{cloud, nullptr}, spec, table, sample_key);
}

CorruptionResult apply_corruption(const CorruptionInput& input, const CorruptionSpec& spec, const SeverityTable& table,
                                  std::uint64_t sample_key, const OcclusionOptions& occlusion) {
  check_severity(spec.severity);
  const SeverityParams& params = table.at(spec.kind, spec.severity);
  const std::uint64_t key = stream_key(spec.seed, ordinal(spec.kind), static_cast<std::uint64_t>(spec.severity), sample_key);
  Rng rng(key);
  const PointCloud& cloud = input.cloud;

  nlohmann::json prov;
  prov["kind"] = canonical_name(spec.kind);
  prov["severity"] = spec.severity;
  prov["seed"] = spec.seed;
  prov["sample_key"] = sample_key;
  prov["stream_key"] = key;
  prov["params"] = table.to_json()[std::string(canonical_name(spec.kind))][static_cast<std::size_t>(spec.severity - 1)];
  nlohmann::json drawn = nlohmann::json::object();

  auto finish = [&](PointCloud out) {
    prov["drawn"] = std::move(drawn);
    prov["input_points"] = cloud.size();
    prov["output_points"] = out.size();
    return CorruptionResult{std::move(out), std::move(prov)};
  };

  if (requires_mesh(spec.kind)) {
    if (input.mesh == nullptr) {
      throw InvalidArgument(std::string(canonical_name(spec.kind)) + " requires a triangle mesh input");
    }
    const int view = std::get<ViewParams>(params).view;
    const ViewPose pose = view_pose(view, rng, occlusion.camera_distance);
    const Bvh bvh(*input.mesh);
    drawn["azimuth_deg"] = pose.azimuth_deg;
    drawn["elevation_deg"] = pose.elevation_deg;
    drawn["camera_distance"] = pose.distance;
    drawn["fov_deg"] = occlusion.fov_deg;
    if (spec.kind == CorruptionKind::kOcclusion) {
      OcclusionScan scan = occlusion_scan(bvh, pose, occlusion);
      drawn["grid"] = scan.grid;
      drawn["search_iterations"] = scan.iterations;
      return finish(std::move(scan.cloud));
    }
    PointCloud scan = lidar_scan(bvh, pose, occlusion.lidar_beams, occlusion.lidar_azimuth_steps, occlusion.fov_deg);
    drawn["beams"] = occlusion.lidar_beams;
    drawn["azimuth_steps"] = occlusion.lidar_azimuth_steps;
    drawn["raw_points"] = scan.size();
    if (scan.size() > occlusion.lidar_max_points) {
      auto keep = rng.sample_without_replacement(scan.size(), occlusion.lidar_max_points);
      std::sort(keep.begin(), keep.end());
      scan = gather(scan, keep);
    }
    return finish(std::move(scan));
  }

  if (cloud.empty()) throw InvalidArgument("corruption input cloud is empty");

  switch (spec.kind) {
    case CorruptionKind::kUniform:
      return finish(distribution_noise(cloud, NoiseDistribution::kUniform, std::get<NoiseParams>(params).scale, rng));
    case CorruptionKind::kGaussian:
      return finish(distribution_noise(cloud, NoiseDistribution::kGaussian, std::get<NoiseParams>(params).scale, rng));
    case CorruptionKind::kImpulse: {
      const auto& p = std::get<ImpulseParams>(params);
      const std::size_t count = p.count.resolve(cloud.size());
      drawn["count"] = count;
      return finish(impulse_noise(cloud, count, p.magnitude, rng));
    }
    case CorruptionKind::kUpsampling: {
      const auto& p = std::get<UpsamplingParams>(params);
      const std::size_t count = p.count.resolve(cloud.size());
      drawn["count"] = count;
      return finish(upsampling_noise(cloud, count, p.bound, rng));
    }
    case CorruptionKind::kBackground: {
      const std::size_t count = std::get<BackgroundParams>(params).count.resolve(cloud.size());
      drawn["count"] = count;
      return finish(background_noise(cloud, count, rng));
    }
    case CorruptionKind::kDensityInc:
    case CorruptionKind::kDensityDec: {
      const auto& p = std::get<DensityParams>(params);
      ClusterDraw draw;
      const auto mode = spec.kind == CorruptionKind::kDensityInc ? DensityMode::kIncrease : DensityMode::kDecrease;
      PointCloud out = local_density(cloud, mode, p.clusters, p.cluster_size, p.fraction, rng, &draw);
      drawn["anchors"] = draw.anchors;
      return finish(std::move(out));
    }
    case CorruptionKind::kCutout: {
      const auto& p = std::get<CutoutParams>(params);
      ClusterDraw draw;
      PointCloud out = cutout(cloud, p.clusters, p.k, rng, &draw);
      drawn["anchors"] = draw.anchors;
      return finish(std::move(out));
    }
    case CorruptionKind::kRotation: {
      RotationDraw draw;
      PointCloud out = random_rotation(cloud, std::get<RotationParams>(params).max_angle_deg, rng, &draw);
      drawn["angles_deg"] = vec_json(draw.angles_deg);
      nlohmann::json m = nlohmann::json::array();
      for (int r = 0; r < 3; ++r) m.push_back(vec_json(draw.matrix.row(r).transpose()));
      drawn["matrix"] = std::move(m);
      return finish(std::move(out));
    }
    case CorruptionKind::kShear: {
      ShearDraw draw;
      PointCloud out = random_shear(cloud, std::get<ShearParams>(params).max_coeff, rng, &draw);
      drawn["a"] = draw.a;
      drawn["b"] = draw.b;
      return finish(std::move(out));
    }
    case CorruptionKind::kFfd:
    case CorruptionKind::kRbf:
    case CorruptionKind::kInvRbf: {
      const auto& p = std::get<DeformParams>(params);
      FfdLattice lattice = perturb_lattice(make_ffd_lattice(deformation_bounds(cloud), p.resolution), p.distance, rng);
      nlohmann::json disp = nlohmann::json::array();
      for (const Vec3& d : lattice.displacements()) disp.push_back(vec_json(d));
      drawn["control_displacements"] = std::move(disp);
      drawn["bounds_min"] = vec_json(lattice.bounds().min);
      drawn["bounds_max"] = vec_json(lattice.bounds().max);
      if (spec.kind == CorruptionKind::kFfd) return finish(apply_ffd(cloud, lattice));
      RbfKernel kernel;
      kernel.variant = spec.kind == CorruptionKind::kRbf ? RbfVariant::kMultiquadric : RbfVariant::kInverseMultiquadric;
      kernel.shape = lattice.spacing().minCoeff();
      const RbfDeformation deformation = solve_rbf(lattice.rest_positions(), lattice.displacements(), kernel);
      drawn["kernel"] = spec.kind == CorruptionKind::kRbf ? "multiquadric" : "inverse_multiquadric";
      drawn["shape"] = kernel.shape;
      drawn["condition_estimate"] = deformation.condition_estimate();
      return finish(apply_rbf(cloud, deformation));
    }
    default: break;
  }
  throw InvalidArgument("unknown corruption kind");
}

}  // namespace pcc
