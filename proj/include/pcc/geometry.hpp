// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace pcc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Ordered list of finite 3D points in model units.
///
/// Immutable after construction; every transform produces a new cloud.
class PointCloud {
 public:
  PointCloud() = default;
  /// Throws GeometryError if any coordinate is NaN or infinite.
  explicit PointCloud(std::vector<Vec3> points);

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const Vec3& operator[](std::size_t i) const { return points_[i]; }
  std::span<const Vec3> points() const noexcept { return points_; }
  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }

  friend bool operator==(const PointCloud& a, const PointCloud& b) { return a.points_ == b.points_; }

 private:
  std::vector<Vec3> points_;
};

using Face = std::array<std::uint32_t, 3>;

/// Indexed triangle mesh. Every face references valid, pairwise distinct
/// vertices.
class TriangleMesh {
 public:
  TriangleMesh() = default;
  /// Throws GeometryError when a face violates the index invariants.
  TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  std::span<const Vec3> vertices() const noexcept { return vertices_; }
  std::span<const Face> faces() const noexcept { return faces_; }
  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t face_count() const noexcept { return faces_.size(); }

  const Vec3& corner(std::size_t face, int k) const { return vertices_[faces_[face][k]]; }

  friend bool operator==(const TriangleMesh& a, const TriangleMesh& b) {
    return a.vertices_ == b.vertices_ && a.faces_ == b.faces_;
  }

 private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
};

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  static Aabb of(std::span<const Vec3> points);
  static Aabb cube(double half_extent) {
    return {Vec3::Constant(-half_extent), Vec3::Constant(half_extent)};
  }

  Vec3 extent() const { return max - min; }
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  Aabb merged(const Aabb& other) const { return {min.cwiseMin(other.min), max.cwiseMax(other.max)}; }
};

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

struct SurfaceSample {
  PointCloud cloud;
  std::vector<std::size_t> face_ids;  // source face of each point
};

/// Area-weighted barycentric sampling of n points over the mesh surface.
/// Zero-area faces receive no samples. Throws GeometryError when the total
/// area is zero.
SurfaceSample sample_surface_with_faces(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);
PointCloud sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

/// Similarity transform p -> (p - center) * scale.
struct NormalizeTransform {
  Vec3 center = Vec3::Zero();
  double scale = 1.0;

  Vec3 apply(const Vec3& p) const { return (p - center) * scale; }
};

/// Centroid to origin, maximum point norm to one.
NormalizeTransform unit_sphere_transform(const PointCloud& cloud);
PointCloud normalize_unit_sphere(const PointCloud& cloud);

PointCloud transform_cloud(const PointCloud& cloud, const NormalizeTransform& t);
TriangleMesh transform_mesh(const TriangleMesh& mesh, const NormalizeTransform& t);

}  // namespace pcc
