// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pcc/geometry.hpp"
#include "pcc/rng.hpp"

namespace pcc {

enum class ShapeClass { kSphere, kCube, kPyramid, kCylinder };
inline constexpr std::array<ShapeClass, 4> kAllShapes = {ShapeClass::kSphere, ShapeClass::kCube, ShapeClass::kPyramid,
                                                         ShapeClass::kCylinder};

std::string_view shape_name(ShapeClass shape);

/// Subdivided icosahedron on the unit sphere: 20 * 4^subdivisions faces.
TriangleMesh icosphere(int subdivisions);
/// Axis-aligned cube [-1, 1]^3, 12 faces.
TriangleMesh unit_cube();
/// Square base z = -1 of half-width 1, apex (0, 0, 1), 6 faces.
TriangleMesh square_pyramid();
/// Radius 1, z in [-1, 1], capped; 4 * segments faces.
TriangleMesh cylinder(int segments);

struct ShapeOptions {
  double anisotropy = 0.15;  // per-axis scale in [1 - a, 1 + a]
  double max_tilt_deg = 10.0;
  bool random_yaw = true;
  int sphere_subdivisions = 2;
  int cylinder_segments = 32;
};

/// Base primitive with random per-axis scale, tilt and yaw applied.
TriangleMesh make_shape(ShapeClass shape, Rng& rng, const ShapeOptions& options = {});

struct ShapeSample {
  std::string id;
  ShapeClass shape;
  TriangleMesh mesh;
};

/// `per_class` samples of each class, interleaved by class, ids
/// "<class>_<index>".
std::vector<ShapeSample> make_shape_dataset(std::size_t per_class, std::uint64_t seed, const ShapeOptions& options = {});

}  // namespace pcc
