// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcc/geometry.hpp"

#include <algorithm>
#include <string>

#include "pcc/errors.hpp"
#include "pcc/rng.hpp"

namespace pcc {

PointCloud::PointCloud(std::vector<Vec3> points) : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!points_[i].allFinite()) {
      throw GeometryError("point " + std::to_string(i) + " has a non-finite coordinate");
    }
  }
}

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (!vertices_[i].allFinite()) {
      throw GeometryError("vertex " + std::to_string(i) + " has a non-finite coordinate");
    }
  }
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const Face& face = faces_[f];
    for (std::uint32_t idx : face) {
      if (idx >= vertices_.size()) {
        throw GeometryError("face " + std::to_string(f) + " references vertex " + std::to_string(idx) +
                            " of " + std::to_string(vertices_.size()));
      }
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      throw GeometryError("face " + std::to_string(f) + " repeats a vertex index");
    }
  }
}

Aabb Aabb::of(std::span<const Vec3> points) {
  if (points.empty()) return {};
  Aabb box{points[0], points[0]};
  for (const Vec3& p : points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

SurfaceSample sample_surface_with_faces(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("sample count must be positive");
  std::vector<double> cumulative(mesh.face_count());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    total += triangle_area(mesh.corner(f, 0), mesh.corner(f, 1), mesh.corner(f, 2));
    cumulative[f] = total;
  }
  if (!(total > 0.0)) throw GeometryError("mesh has zero total surface area");

  Rng rng(seed);
  std::vector<Vec3> points;
  std::vector<std::size_t> face_ids;
  points.reserve(n);
  face_ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double target = rng.uniform() * total;
    // upper_bound skips zero-width (zero-area) intervals.
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.end()) --it;
    const auto f = static_cast<std::size_t>(it - cumulative.begin());
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const Vec3& a = mesh.corner(f, 0);
    const Vec3& b = mesh.corner(f, 1);
    const Vec3& c = mesh.corner(f, 2);
    points.push_back((1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c);
    face_ids.push_back(f);
  }
  return {PointCloud(std::move(points)), std::move(face_ids)};
}

PointCloud sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  return sample_surface_with_faces(mesh, n, seed).cloud;
}

NormalizeTransform unit_sphere_transform(const PointCloud& cloud) {
  if (cloud.empty()) throw GeometryError("cannot normalize an empty cloud");
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : cloud) centroid += p;
  centroid /= static_cast<double>(cloud.size());
  double radius = 0.0;
  for (const Vec3& p : cloud) radius = std::max(radius, (p - centroid).norm());
  if (!(radius > 0.0)) throw GeometryError("cannot normalize a cloud with zero extent");
  return {centroid, 1.0 / radius};
}

PointCloud transform_cloud(const PointCloud& cloud, const NormalizeTransform& t) {
  std::vector<Vec3> out;
  out.reserve(cloud.size());
  for (const Vec3& p : cloud) out.push_back(t.apply(p));
  return PointCloud(std::move(out));
}

PointCloud normalize_unit_sphere(const PointCloud& cloud) {
  return transform_cloud(cloud, unit_sphere_transform(cloud));
}

TriangleMesh transform_mesh(const TriangleMesh& mesh, const NormalizeTransform& t) {
  std::vector<Vec3> vertices;
  vertices.reserve(mesh.vertex_count());
  for (const Vec3& v : mesh.vertices()) vertices.push_back(t.apply(v));
  return TriangleMesh(std::move(vertices), {mesh.faces().begin(), mesh.faces().end()});
}

}  // namespace pcc
