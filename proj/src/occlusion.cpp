// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcc/occlusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "pcc/errors.hpp"

namespace pcc {
namespace {

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Slab test; returns the entry parameter or +inf on a miss.
double box_entry(const Aabb& box, const Ray& ray, double t_max) {
  double t0 = 0.0;
  double t1 = t_max;
  for (int a = 0; a < 3; ++a) {
    const double o = ray.origin[a];
    const double d = ray.direction[a];
    if (d == 0.0) {
      if (o < box.min[a] || o > box.max[a]) return std::numeric_limits<double>::infinity();
      continue;
    }
    const double inv = 1.0 / d;
    double ta = (box.min[a] - o) * inv;
    double tb = (box.max[a] - o) * inv;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::numeric_limits<double>::infinity();
  }
  return t0;
}

bool closer(const Hit& a, const Hit& b) { return a.t < b.t || (a.t == b.t && a.triangle < b.triangle); }

}  // namespace

Vec3 ViewPose::position() const {
  const double az = deg2rad(azimuth_deg);
  const double el = deg2rad(elevation_deg);
  return distance * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
}

ViewPose view_pose(int view_index, Rng& rng, double distance) {
  if (view_index < 1 || view_index > 5) {
    throw InvalidArgument("view index " + std::to_string(view_index) + " outside [1, 5]");
  }
  ViewPose pose;
  pose.azimuth_deg = kViewAzimuthStepDeg * (view_index - 1);
  pose.elevation_deg = rng.uniform(kMinElevationDeg, kMaxElevationDeg);
  pose.distance = distance;
  return pose;
}

std::optional<Hit> intersect_triangle(const Ray& ray, const Vec3& a, const Vec3& b, const Vec3& c, double t_min) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 p = ray.direction.cross(e2);
  const double det = e1.dot(p);
  if (det == 0.0) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Vec3 s = ray.origin - a;
  const double u = s.dot(p) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = ray.direction.dot(q) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(q) * inv_det;
  if (!(t > t_min)) return std::nullopt;
  return Hit{t, 0, u, v};
}

Vec3 hit_point(const TriangleMesh& mesh, const Hit& hit) {
  return (1.0 - hit.u - hit.v) * mesh.corner(hit.triangle, 0) + hit.u * mesh.corner(hit.triangle, 1) +
         hit.v * mesh.corner(hit.triangle, 2);
}

Bvh::Bvh(const TriangleMesh& mesh, std::size_t leaf_size)
    : mesh_(&mesh), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  const std::size_t n = mesh.face_count();
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), std::uint32_t{0});
  centroids_.reserve(n);
  for (std::size_t f = 0; f < n; ++f) {
    centroids_.push_back((mesh.corner(f, 0) + mesh.corner(f, 1) + mesh.corner(f, 2)) / 3.0);
  }
  if (n > 0) build(0, static_cast<std::uint32_t>(n));
}

std::int32_t Bvh::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  Aabb box{mesh_->corner(order_[begin], 0), mesh_->corner(order_[begin], 0)};
  Aabb centroid_box{centroids_[order_[begin]], centroids_[order_[begin]]};
  for (std::uint32_t i = begin; i < end; ++i) {
    for (int k = 0; k < 3; ++k) {
      box.min = box.min.cwiseMin(mesh_->corner(order_[i], k));
      box.max = box.max.cwiseMax(mesh_->corner(order_[i], k));
    }
    centroid_box.min = centroid_box.min.cwiseMin(centroids_[order_[i]]);
    centroid_box.max = centroid_box.max.cwiseMax(centroids_[order_[i]]);
  }
  // Pad so rounding in the slab test never rejects a boundary hit.
  const double pad = 1e-9 * (1.0 + box.extent().maxCoeff());
  box.min.array() -= pad;
  box.max.array() += pad;
  nodes_.push_back({box, begin, end, -1, -1});
  if (end - begin <= leaf_size_) return id;

  int axis = 0;
  centroid_box.extent().maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = centroids_[a][axis];
                     const double cb = centroids_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::optional<Hit> Bvh::nearest_hit(const Ray& ray, double t_min) const {
  if (nodes_.empty()) return std::nullopt;
  std::optional<Hit> best;
  double best_t = std::numeric_limits<double>::infinity();
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    // Entry equal to best_t can still hold a lower-index tie.
    if (box_entry(node.box, ray, best_t) > best_t) continue;
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t tri = order_[i];
        auto hit = intersect_triangle(ray, mesh_->corner(tri, 0), mesh_->corner(tri, 1), mesh_->corner(tri, 2), t_min);
        if (!hit) continue;
        hit->triangle = tri;
        if (!best || closer(*hit, *best)) {
          best = hit;
          best_t = hit->t;
        }
      }
      continue;
    }
    const double tl = box_entry(nodes_[static_cast<std::size_t>(node.left)].box, ray, best_t);
    const double tr = box_entry(nodes_[static_cast<std::size_t>(node.right)].box, ray, best_t);
    // Push the farther child first so the nearer one is visited next.
    if (tl <= tr) {
      if (tr <= best_t) stack.push_back(node.right);
      if (tl <= best_t) stack.push_back(node.left);
    } else {
      if (tl <= best_t) stack.push_back(node.left);
      if (tr <= best_t) stack.push_back(node.right);
    }
  }
  return best;
}

SensorFrame sensor_frame(const ViewPose& pose) {
  SensorFrame frame;
  frame.origin = pose.position();
  frame.forward = (-frame.origin).normalized();
  frame.right = frame.forward.cross(Vec3::UnitZ()).normalized();
  frame.up = frame.right.cross(frame.forward).normalized();
  return frame;
}

PointCloud raycast_visible(const Bvh& bvh, const ViewPose& pose, std::size_t n_rays, double fov_deg) {
  if (n_rays == 0) throw InvalidArgument("ray budget must be positive");
  const auto grid = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_rays)) - 1e-12));
  const SensorFrame frame = sensor_frame(pose);
  const double half = std::tan(deg2rad(fov_deg) / 2.0);
  std::vector<Vec3> points;
  for (std::size_t row = 0; row < grid; ++row) {
    const double y = half * (1.0 - 2.0 * (static_cast<double>(row) + 0.5) / static_cast<double>(grid));
    for (std::size_t col = 0; col < grid; ++col) {
      const double x = half * (2.0 * (static_cast<double>(col) + 0.5) / static_cast<double>(grid) - 1.0);
      const Ray ray(frame.origin, frame.forward + x * frame.right + y * frame.up);
      if (auto hit = bvh.nearest_hit(ray)) points.push_back(hit_point(bvh.mesh(), *hit));
    }
  }
  if (points.empty()) throw GeometryError("degenerate view: no ray hit the mesh");
  return PointCloud(std::move(points));
}

PointCloud raycast_visible(const TriangleMesh& mesh, const ViewPose& pose, std::size_t n_rays, double fov_deg) {
  return raycast_visible(Bvh(mesh), pose, n_rays, fov_deg);
}

double sensor_elevation(const SensorFrame& frame, const Vec3& q) {
  const Vec3 rel = q - frame.origin;
  return std::atan2(rel.dot(frame.up), rel.dot(frame.forward));
}

PointCloud lidar_scan(const Bvh& bvh, const ViewPose& pose, int n_beams, int azimuth_steps, double fov_deg,
                      std::vector<int>* beam_of_point) {
  if (n_beams < 2) throw InvalidArgument("LiDAR needs at least 2 beams");
  if (azimuth_steps < 1) throw InvalidArgument("LiDAR needs at least 1 azimuth step");
  const SensorFrame frame = sensor_frame(pose);
  const double fov = deg2rad(fov_deg);
  std::vector<Vec3> points;
  if (beam_of_point) beam_of_point->clear();
  for (int b = 0; b < n_beams; ++b) {
    const double elevation = fov / 2.0 - fov * b / (n_beams - 1);
    const Vec3 beam_axis = std::cos(elevation) * frame.forward + std::sin(elevation) * frame.up;
    for (int s = 0; s < azimuth_steps; ++s) {
      const double azimuth = fov * ((s + 0.5) / azimuth_steps - 0.5);
      const Ray ray(frame.origin, std::cos(azimuth) * beam_axis + std::sin(azimuth) * frame.right);
      if (auto hit = bvh.nearest_hit(ray)) {
        points.push_back(hit_point(bvh.mesh(), *hit));
        if (beam_of_point) beam_of_point->push_back(b);
      }
    }
  }
  if (points.empty()) throw GeometryError("degenerate view: no LiDAR beam hit the mesh");
  return PointCloud(std::move(points));
}

PointCloud lidar_scan(const TriangleMesh& mesh, const ViewPose& pose, int n_beams, int azimuth_steps, double fov_deg,
                      std::vector<int>* beam_of_point) {
  return lidar_scan(Bvh(mesh), pose, n_beams, azimuth_steps, fov_deg, beam_of_point);
}

OcclusionScan occlusion_scan(const Bvh& bvh, const ViewPose& pose, const OcclusionOptions& options) {
  std::size_t lo = 1;
  std::size_t hi = 0;  // 0 = no upper bound found yet
  std::size_t grid = options.initial_grid;
  OcclusionScan result;
  for (int it = 1; it <= options.max_search_iterations; ++it) {
    result.cloud = raycast_visible(bvh, pose, grid * grid, options.fov_deg);
    result.grid = grid;
    result.iterations = it;
    const std::size_t n = result.cloud.size();
    if (n >= options.target_min && n <= options.target_max) break;
    if (n < options.target_min) {
      lo = grid;
      // Visible count grows with grid^2; aim for the middle of the window.
      const double mid_target = 0.5 * static_cast<double>(options.target_min + options.target_max);
      std::size_t next = static_cast<std::size_t>(std::ceil(grid * std::sqrt(mid_target / static_cast<double>(n))));
      if (hi != 0) next = std::min(next, (lo + hi) / 2);
      grid = std::max(next, grid + 1);
    } else {
      hi = grid;
      grid = std::max<std::size_t>(1, (lo + hi) / 2);
    }
    if (hi != 0 && grid >= hi) break;
  }
  return result;
}

}  // namespace pcc
