// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pcc/geometry.hpp"
#include "pcc/rng.hpp"

namespace pcc {

/// Sensor placement looking at the origin. Azimuth pivots about +z starting
/// at +x; elevation is measured up from the xy plane.
struct ViewPose {
  double azimuth_deg = 0.0;
  double elevation_deg = 45.0;
  double distance = 2.5;

  Vec3 position() const;
};

inline constexpr double kViewAzimuthStepDeg = 72.0;
inline constexpr double kMinElevationDeg = 30.0;
inline constexpr double kMaxElevationDeg = 60.0;

/// View index 1..5 selects azimuth 72 * (index - 1); elevation is drawn from
/// U(30, 60) degrees.
ViewPose view_pose(int view_index, Rng& rng, double distance = 2.5);

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length

  /// Normalizes `direction`.
  Ray(const Vec3& o, const Vec3& d) : origin(o), direction(d.normalized()) {}
  Vec3 at(double t) const { return origin + t * direction; }
};

struct Hit {
  double t = 0.0;
  std::uint32_t triangle = 0;
  double u = 0.0;  // barycentric weight of corner 1
  double v = 0.0;  // barycentric weight of corner 2
};

inline constexpr double kRayEpsilon = 1e-9;

/// Moller-Trumbore; accepts hits with t > t_min on either side of the face.
std::optional<Hit> intersect_triangle(const Ray& ray, const Vec3& a, const Vec3& b, const Vec3& c,
                                      double t_min = kRayEpsilon);

/// Hit point evaluated from barycentrics so it lies in the triangle's plane.
Vec3 hit_point(const TriangleMesh& mesh, const Hit& hit);

/// Binary bounding-volume hierarchy over mesh triangles (median split on
/// centroid extent). Nearest hits are ordered by (t, triangle index) so the
/// result matches an exhaustive scan exactly.
class Bvh {
 public:
  explicit Bvh(const TriangleMesh& mesh, std::size_t leaf_size = 4);

  std::optional<Hit> nearest_hit(const Ray& ray, double t_min = kRayEpsilon) const;
  const TriangleMesh& mesh() const noexcept { return *mesh_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  struct Node {
    Aabb box;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  /// Triangles of a leaf, for containment checks.
  std::span<const std::uint32_t> leaf_triangles(const Node& node) const {
    return std::span<const std::uint32_t>(order_).subspan(node.begin, node.end - node.begin);
  }

 private:
  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  const TriangleMesh* mesh_;
  std::vector<std::uint32_t> order_;
  std::vector<Vec3> centroids_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_;
};

/// Orthonormal sensor basis: forward points at the origin, up is the
/// projection of +z.
struct SensorFrame {
  Vec3 origin;
  Vec3 forward;
  Vec3 right;
  Vec3 up;
};

SensorFrame sensor_frame(const ViewPose& pose);

/// Pinhole camera with a square image plane of ceil(sqrt(n_rays))^2 pixels.
/// Keeps the nearest hit of each pixel ray, in row-major pixel order.
/// Throws GeometryError when no ray hits the mesh.
PointCloud raycast_visible(const Bvh& bvh, const ViewPose& pose, std::size_t n_rays, double fov_deg = 50.0);
PointCloud raycast_visible(const TriangleMesh& mesh, const ViewPose& pose, std::size_t n_rays, double fov_deg = 50.0);

/// Elevation of q in the sensor frame: atan2(up component, forward component).
double sensor_elevation(const SensorFrame& frame, const Vec3& q);

/// Scan-line sensor: n_beams planar fans at evenly spaced elevations across
/// the field of view, each swept over azimuth_steps directions. Points of one
/// beam share sensor_elevation(). Output is in (beam, step) order.
PointCloud lidar_scan(const Bvh& bvh, const ViewPose& pose, int n_beams, int azimuth_steps, double fov_deg = 50.0,
                      std::vector<int>* beam_of_point = nullptr);
PointCloud lidar_scan(const TriangleMesh& mesh, const ViewPose& pose, int n_beams, int azimuth_steps,
                      double fov_deg = 50.0, std::vector<int>* beam_of_point = nullptr);

struct OcclusionOptions {
  double fov_deg = 50.0;
  double camera_distance = 2.5;
  std::size_t initial_grid = 96;
  std::size_t target_min = 768;
  std::size_t target_max = 1280;
  int max_search_iterations = 6;
  int lidar_beams = 32;
  int lidar_azimuth_steps = 512;
  std::size_t lidar_max_points = 1024;
};

struct OcclusionScan {
  PointCloud cloud;
  std::size_t grid = 0;  // final pixel grid side
  int iterations = 0;
};

/// raycast_visible with the pixel grid adjusted by bisection until the
/// visible cloud size falls in [target_min, target_max] or the iteration
/// budget runs out.
OcclusionScan occlusion_scan(const Bvh& bvh, const ViewPose& pose, const OcclusionOptions& options);

}  // namespace pcc
