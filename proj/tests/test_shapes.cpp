// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include <gtest/gtest.h>

#include "pcc/shapes.hpp"

namespace pcc {
namespace {

// Signed volume by the divergence theorem; positive for outward faces.
double signed_volume(const TriangleMesh& m) {
  double v = 0.0;
  for (std::size_t f = 0; f < m.face_count(); ++f) v += m.corner(f, 0).dot(m.corner(f, 1).cross(m.corner(f, 2)));
  return v / 6.0;
}

// Each directed edge once and its reverse once: closed and consistently oriented.
bool closed_and_oriented(const TriangleMesh& m) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
  for (const Face& f : m.faces())
    for (int k = 0; k < 3; ++k) ++edges[{f[k], f[(k + 1) % 3]}];
  for (const auto& [e, n] : edges) {
    if (n != 1) return false;
    const auto rev = edges.find({e.second, e.first});
    if (rev == edges.end() || rev->second != 1) return false;
  }
  return true;
}

TEST(PrimitiveTest, FaceCounts) {
  EXPECT_EQ(icosphere(0).face_count(), 20u);
  EXPECT_EQ(icosphere(2).face_count(), 320u);
  EXPECT_EQ(unit_cube().face_count(), 12u);
  EXPECT_EQ(square_pyramid().face_count(), 6u);
  EXPECT_EQ(cylinder(24).face_count(), 96u);
}

TEST(PrimitiveTest, ClosedOutwardAndVolume) {
  const double pi = std::numbers::pi;
  struct Case {
    TriangleMesh mesh;
    double volume;
    double tol;
  };
  const Case cases[] = {{icosphere(3), 4.0 / 3.0 * pi, 0.05}, {unit_cube(), 8.0, 1e-12},
                        {square_pyramid(), 8.0 / 3.0, 1e-12}, {cylinder(64), 2 * pi, 0.02}};
  for (const Case& c : cases) {
    EXPECT_TRUE(closed_and_oriented(c.mesh));
    EXPECT_NEAR(signed_volume(c.mesh), c.volume, c.tol);
  }
}

TEST(PrimitiveTest, IcosphereOnUnitSphere) {
  const TriangleMesh sphere = icosphere(3);
  for (const Vec3& v : sphere.vertices()) EXPECT_NEAR(v.norm(), 1.0, 1e-12);
}

TEST(MakeShapeTest, RandomizedShapesStayClosed) {
  Rng rng(3);
  for (ShapeClass s : kAllShapes) {
    for (int i = 0; i < 5; ++i) {
      const TriangleMesh m = make_shape(s, rng);
      EXPECT_TRUE(closed_and_oriented(m));
      EXPECT_GT(signed_volume(m), 0.0);
    }
  }
}

TEST(DatasetTest, IdsInterleavingAndDeterminism) {
  const auto d = make_shape_dataset(3, 11);
  ASSERT_EQ(d.size(), 12u);
  EXPECT_EQ(d[0].id, "sphere_0000");
  EXPECT_EQ(d[1].id, "cube_0000");
  EXPECT_EQ(d[6].id, "pyramid_0001");
  EXPECT_EQ(d[11].id, "cylinder_0002");
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(d[i].shape, kAllShapes[i % 4]);
  const auto again = make_shape_dataset(3, 11);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(d[i].mesh, again[i].mesh);
  EXPECT_FALSE(make_shape_dataset(3, 12)[0].mesh == d[0].mesh);
}

}  // namespace
}  // namespace pcc
