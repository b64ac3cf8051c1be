// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcc/shapes.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <utility>

#include "pcc/corruption.hpp"
#include "pcc/errors.hpp"

namespace pcc {

std::string_view shape_name(ShapeClass shape) {
  switch (shape) {
    case ShapeClass::kSphere: return "sphere";
    case ShapeClass::kCube: return "cube";
    case ShapeClass::kPyramid: return "pyramid";
    case ShapeClass::kCylinder: return "cylinder";
  }
  return "";
}

TriangleMesh icosphere(int subdivisions) {
  if (subdivisions < 0) throw InvalidArgument("subdivisions must be non-negative");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& p : v) p.normalize();
  std::vector<Face> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                         {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                         {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      const auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const auto idx = static_cast<std::uint32_t>(v.size() - 1);
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(f.size() * 4);
    for (const Face& tri : f) {
      const std::uint32_t ab = midpoint(tri[0], tri[1]);
      const std::uint32_t bc = midpoint(tri[1], tri[2]);
      const std::uint32_t ca = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  return TriangleMesh(std::move(v), std::move(f));
}

TriangleMesh unit_cube() {
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) v.emplace_back(i & 1 ? 1.0 : -1.0, i & 2 ? 1.0 : -1.0, i & 4 ? 1.0 : -1.0);
  std::vector<Face> f = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                         {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return TriangleMesh(std::move(v), std::move(f));
}

TriangleMesh square_pyramid() {
  std::vector<Vec3> v = {{-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1}, {0, 0, 1}};
  std::vector<Face> f = {{0, 2, 1}, {0, 3, 2}, {0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
  return TriangleMesh(std::move(v), std::move(f));
}

TriangleMesh cylinder(int segments) {
  if (segments < 3) throw InvalidArgument("cylinder needs at least 3 segments");
  const auto n = static_cast<std::uint32_t>(segments);
  std::vector<Vec3> v;
  for (std::uint32_t i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    v.emplace_back(std::cos(a), std::sin(a), -1.0);
    v.emplace_back(std::cos(a), std::sin(a), 1.0);
  }
  const std::uint32_t bottom = 2 * n;
  const std::uint32_t top = 2 * n + 1;
  v.emplace_back(0.0, 0.0, -1.0);
  v.emplace_back(0.0, 0.0, 1.0);
  std::vector<Face> f;
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t j = (i + 1) % n;
    f.push_back({2 * i, 2 * j, 2 * i + 1});
    f.push_back({2 * j, 2 * j + 1, 2 * i + 1});
    f.push_back({bottom, 2 * j, 2 * i});
    f.push_back({top, 2 * i + 1, 2 * j + 1});
  }
  return TriangleMesh(std::move(v), std::move(f));
}

TriangleMesh make_shape(ShapeClass shape, Rng& rng, const ShapeOptions& options) {
  TriangleMesh base = [&] {
    switch (shape) {
      case ShapeClass::kSphere: return icosphere(options.sphere_subdivisions);
      case ShapeClass::kCube: return unit_cube();
      case ShapeClass::kPyramid: return square_pyramid();
      case ShapeClass::kCylinder: return cylinder(options.cylinder_segments);
    }
    throw InvalidArgument("unknown shape");
  }();
  Vec3 scale;
  for (int k = 0; k < 3; ++k) scale[k] = rng.uniform(1.0 - options.anisotropy, 1.0 + options.anisotropy);
  const double tilt_x = rng.uniform(-options.max_tilt_deg, options.max_tilt_deg);
  const double tilt_y = rng.uniform(-options.max_tilt_deg, options.max_tilt_deg);
  const double yaw = options.random_yaw ? rng.uniform(0.0, 360.0) : 0.0;
  const Mat3 rot = rotation_from_angles(Vec3(tilt_x, tilt_y, yaw));
  std::vector<Vec3> v;
  v.reserve(base.vertices().size());
  for (const Vec3& p : base.vertices()) v.push_back(rot * p.cwiseProduct(scale));
  return TriangleMesh(std::move(v), std::vector<Face>(base.faces().begin(), base.faces().end()));
}

std::vector<ShapeSample> make_shape_dataset(std::size_t per_class, std::uint64_t seed, const ShapeOptions& options) {
  Rng rng(seed);
  std::vector<ShapeSample> out;
  out.reserve(per_class * kAllShapes.size());
  for (std::size_t i = 0; i < per_class; ++i) {
    for (ShapeClass shape : kAllShapes) {
      char id[64];
      std::snprintf(id, sizeof(id), "%s_%04zu", std::string(shape_name(shape)).c_str(), i);
      out.push_back({id, shape, make_shape(shape, rng, options)});
    }
  }
  return out;
}

}  // namespace pcc
