// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pcc/corruption.hpp"
#include "pcc/errors.hpp"
#include "test_util.hpp"

namespace pcc {
namespace {

using testutil::random_cloud;
using testutil::sphere_cloud;

TEST(ApplyCorruptionTest, CountContractAllSeverities) {
  const PointCloud cloud = sphere_cloud(1024, 5);
  const SeverityTable table = SeverityTable::defaults();
  for (int s = 1; s <= 5; ++s) {
    auto count = [&](CorruptionKind k) { return apply_corruption(cloud, {k, s, 11}, table, 3).cloud.size(); };
    const std::size_t n = 1024;
    const auto us = static_cast<std::size_t>(s);
    EXPECT_EQ(count(CorruptionKind::kUniform), n);
    EXPECT_EQ(count(CorruptionKind::kGaussian), n);
    EXPECT_EQ(count(CorruptionKind::kImpulse), n);
    EXPECT_EQ(count(CorruptionKind::kRotation), n);
    EXPECT_EQ(count(CorruptionKind::kShear), n);
    EXPECT_EQ(count(CorruptionKind::kFfd), n);
    EXPECT_EQ(count(CorruptionKind::kRbf), n);
    EXPECT_EQ(count(CorruptionKind::kInvRbf), n);
    EXPECT_EQ(count(CorruptionKind::kUpsampling), n + us * n / 10);
    EXPECT_EQ(count(CorruptionKind::kBackground), n + 20 * us);
    EXPECT_EQ(count(CorruptionKind::kDensityInc), n + 75 * us);
    EXPECT_EQ(count(CorruptionKind::kDensityDec), n - 75 * us);
    EXPECT_EQ(count(CorruptionKind::kCutout), n - 50 * us);
  }
}

TEST(ApplyCorruptionTest, CutoutSeverityThreeExample) {
  const PointCloud cloud = random_cloud(1024, 8);
  EXPECT_EQ(apply_corruption(cloud, {CorruptionKind::kCutout, 3, 0}, SeverityTable::defaults()).cloud.size(), 874u);
}

TEST(ApplyCorruptionTest, DeterministicAndKeyed) {
  const PointCloud cloud = sphere_cloud(512, 2);
  const SeverityTable table = SeverityTable::defaults();
  for (CorruptionKind k : kAllCorruptions) {
    if (requires_mesh(k)) continue;
    const auto a = apply_corruption(cloud, {k, 3, 42}, table, 7);
    const auto b = apply_corruption(cloud, {k, 3, 42}, table, 7);
    EXPECT_EQ(a.cloud, b.cloud) << canonical_name(k);
    EXPECT_EQ(a.provenance, b.provenance) << canonical_name(k);
    const auto c = apply_corruption(cloud, {k, 3, 42}, table, 8);
    EXPECT_FALSE(a.cloud == c.cloud) << canonical_name(k);
  }
}

TEST(ApplyCorruptionTest, ProvenanceRecordsSpec) {
  const PointCloud cloud = sphere_cloud(256, 2);
  const auto r = apply_corruption(cloud, {CorruptionKind::kRotation, 2, 9}, SeverityTable::defaults(), 4);
  EXPECT_EQ(r.provenance["kind"], "rotation");
  EXPECT_EQ(r.provenance["severity"], 2);
  EXPECT_EQ(r.provenance["seed"], 9u);
  EXPECT_EQ(r.provenance["drawn"]["matrix"].size(), 3u);
  EXPECT_EQ(r.provenance["stream_key"], stream_key(9, ordinal(CorruptionKind::kRotation), 2, 4));
}

TEST(ApplyCorruptionTest, MeshKindsNeedMesh) {
  const PointCloud cloud = sphere_cloud(128, 2);
  EXPECT_THROW(apply_corruption(cloud, {CorruptionKind::kOcclusion, 1, 0}, SeverityTable::defaults()), InvalidArgument);
  EXPECT_THROW(apply_corruption(cloud, {CorruptionKind::kLidar, 1, 0}, SeverityTable::defaults()), InvalidArgument);
}

TEST(ApplyCorruptionTest, RejectsBadSeverityAndEmptyCloud) {
  const PointCloud cloud = sphere_cloud(128, 2);
  EXPECT_THROW(apply_corruption(cloud, {CorruptionKind::kGaussian, 0, 0}, SeverityTable::defaults()), InvalidArgument);
  EXPECT_THROW(apply_corruption(PointCloud{}, {CorruptionKind::kGaussian, 1, 0}, SeverityTable::defaults()),
               InvalidArgument);
}

TEST(DistributionNoiseTest, TinyScaleIsIdentity) {
  const PointCloud cloud = random_cloud(100, 1);
  Rng rng(1);
  const PointCloud out = distribution_noise(cloud, NoiseDistribution::kGaussian, 1e-300, rng);
  for (std::size_t i = 0; i < cloud.size(); ++i) EXPECT_LT((out[i] - cloud[i]).norm(), 1e-12);
}

TEST(DistributionNoiseTest, UniformSupport) {
  const PointCloud cloud = random_cloud(5000, 2);
  Rng rng(3);
  const PointCloud out = distribution_noise(cloud, NoiseDistribution::kUniform, 0.05, rng);
  double max_delta = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) max_delta = std::max(max_delta, (out[i] - cloud[i]).cwiseAbs().maxCoeff());
  EXPECT_LE(max_delta, 0.05);
  EXPECT_GT(max_delta, 0.04);
}

TEST(DistributionNoiseTest, GaussianStdWithinTwoPercent) {
  const PointCloud cloud = random_cloud(100000, 4);
  Rng rng(5);
  const PointCloud out = distribution_noise(cloud, NoiseDistribution::kGaussian, 0.02, rng);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double d = out[i].x() - cloud[i].x();
    sum += d;
    sum2 += d * d;
  }
  const double n = static_cast<double>(cloud.size());
  const double sd = std::sqrt(sum2 / n - (sum / n) * (sum / n));
  EXPECT_NEAR(sd, 0.02, 0.02 * 0.02);
}

TEST(DistributionNoiseTest, NonPositiveScaleRejected) {
  Rng rng(1);
  EXPECT_THROW(distribution_noise(random_cloud(10, 1), NoiseDistribution::kUniform, 0.0, rng), InvalidArgument);
  EXPECT_THROW(distribution_noise(random_cloud(10, 1), NoiseDistribution::kGaussian, -1.0, rng), InvalidArgument);
}

TEST(ImpulseNoiseTest, ZeroCountIsIdentity) {
  const PointCloud cloud = random_cloud(64, 1);
  Rng rng(1);
  EXPECT_EQ(impulse_noise(cloud, 0, 0.05, rng), cloud);
}

TEST(ImpulseNoiseTest, ExactlyCountPointsMovedByMagnitude) {
  const PointCloud cloud = random_cloud(1024, 2);
  Rng rng(6);
  std::vector<std::size_t> chosen;
  const PointCloud out = impulse_noise(cloud, 50, 0.05, rng, &chosen);
  EXPECT_EQ(std::set<std::size_t>(chosen.begin(), chosen.end()).size(), 50u);
  std::size_t differing = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (out[i] == cloud[i]) continue;
    ++differing;
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(std::abs(out[i][k] - cloud[i][k]), 0.05, 1e-15);
  }
  EXPECT_EQ(differing, 50u);
}

TEST(ImpulseNoiseTest, CountAboveSizeRejected) {
  Rng rng(1);
  EXPECT_THROW(impulse_noise(random_cloud(10, 1), 11, 0.05, rng), InvalidArgument);
}

TEST(UpsamplingNoiseTest, AddsCountNearOriginals) {
  const PointCloud cloud = random_cloud(1024, 3);
  Rng rng(2);
  const PointCloud out = upsampling_noise(cloud, 512, 0.05, rng);
  ASSERT_EQ(out.size(), 1536u);
  for (std::size_t i = 0; i < cloud.size(); ++i) EXPECT_EQ(out[i], cloud[i]);
  for (std::size_t i = cloud.size(); i < out.size(); ++i) {
    double best = 1e300;
    for (const Vec3& p : cloud) best = std::min(best, (out[i] - p).cwiseAbs().maxCoeff());
    EXPECT_LE(best, 0.05);
  }
}

TEST(UpsamplingNoiseTest, TinyBoundDuplicatesAnchor) {
  const PointCloud cloud = random_cloud(32, 3);
  Rng rng(2);
  const PointCloud out = upsampling_noise(cloud, 1, 1e-300, rng);
  double best = 1e300;
  for (const Vec3& p : cloud) best = std::min(best, (out[32] - p).norm());
  EXPECT_LT(best, 1e-12);
}

TEST(UpsamplingNoiseTest, Errors) {
  Rng rng(1);
  EXPECT_THROW(upsampling_noise(PointCloud{}, 1, 0.05, rng), InvalidArgument);
  EXPECT_THROW(upsampling_noise(random_cloud(4, 1), 0, 0.05, rng), InvalidArgument);
}

TEST(BackgroundNoiseTest, PointsInCubeAndOriginalsKept) {
  const PointCloud cloud = random_cloud(100, 3);
  Rng rng(2);
  const PointCloud out = background_noise(cloud, 60, rng);
  ASSERT_EQ(out.size(), 160u);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(out[i], cloud[i]);
  for (std::size_t i = 100; i < 160; ++i) EXPECT_LE(out[i].cwiseAbs().maxCoeff(), 1.0);
}

TEST(BackgroundNoiseTest, MonteCarloMeanNearOrigin) {
  Rng rng(9);
  const PointCloud out = background_noise(random_cloud(1, 1), 100000, rng);
  Vec3 mean = Vec3::Zero();
  for (std::size_t i = 1; i < out.size(); ++i) mean += out[i];
  mean /= 100000.0;
  EXPECT_LT(mean.norm(), 0.02);
}

TEST(LocalDensityTest, DecreaseAndIncreaseCounts) {
  const PointCloud cloud = random_cloud(1024, 4);
  Rng r1(1), r2(1);
  EXPECT_EQ(local_density(cloud, DensityMode::kDecrease, 1, 100, 0.75, r1).size(), 949u);
  EXPECT_EQ(local_density(cloud, DensityMode::kIncrease, 1, 100, 0.75, r2).size(), 1099u);
}

TEST(LocalDensityTest, IncreaseDuplicatesClusterMembersWithJitter) {
  const PointCloud cloud = random_cloud(1024, 4);
  Rng rng(2);
  ClusterDraw draw;
  const PointCloud out = local_density(cloud, DensityMode::kIncrease, 3, 100, 0.75, rng, &draw);
  ASSERT_EQ(draw.anchors.size(), 3u);
  const auto pts = testutil::p3s(cloud);
  std::size_t next = cloud.size();
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(draw.members[c], oracle::knn_scan(pts, pts[draw.anchors[c]], 100));
    const std::set<std::size_t> members(draw.members[c].begin(), draw.members[c].end());
    ASSERT_EQ(draw.affected[c].size(), 75u);
    for (std::size_t src : draw.affected[c]) {
      EXPECT_TRUE(members.count(src));
      EXPECT_LT((out[next++] - cloud[src]).norm(), 0.01 * 8);
    }
  }
  EXPECT_EQ(next, out.size());
}

TEST(LocalDensityTest, DecreaseRemovesFractionOfRecordedClusters) {
  const PointCloud cloud = random_cloud(1024, 5);
  Rng rng(3);
  ClusterDraw draw;
  const PointCloud out = local_density(cloud, DensityMode::kDecrease, 4, 100, 0.75, rng, &draw);
  std::set<std::size_t> removed;
  for (std::size_t c = 0; c < 4; ++c) {
    const std::set<std::size_t> members(draw.members[c].begin(), draw.members[c].end());
    for (std::size_t d : draw.affected[c]) {
      EXPECT_TRUE(members.count(d));
      removed.insert(d);
    }
  }
  EXPECT_LE(removed.size(), 4u * 75u);
  std::vector<Vec3> expected;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (!removed.count(i)) expected.push_back(cloud[i]);
  EXPECT_EQ(out, PointCloud(expected));
}

TEST(LocalDensityTest, Errors) {
  Rng rng(1);
  EXPECT_THROW(local_density(random_cloud(50, 1), DensityMode::kDecrease, 1, 100, 0.75, rng), InvalidArgument);
  EXPECT_THROW(local_density(random_cloud(200, 1), DensityMode::kIncrease, 0, 100, 0.75, rng), InvalidArgument);
}

TEST(CutoutTest, SingleClusterExample) {
  Rng rng(1);
  EXPECT_EQ(cutout(random_cloud(1024, 1), 1, 50, rng).size(), 974u);
}

// Replays the sequential removal with a brute-force kNN over the survivors.
TEST(CutoutTest, RemovedSetsMatchKnnOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PointCloud cloud = random_cloud(600, 100 + seed);
    Rng rng(seed);
    ClusterDraw draw;
    const PointCloud out = cutout(cloud, 5, 50, rng, &draw);
    ASSERT_EQ(draw.anchors.size(), 5u);
    std::vector<std::size_t> alive(cloud.size());
    for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;
    for (std::size_t c = 0; c < 5; ++c) {
      ASSERT_TRUE(std::find(alive.begin(), alive.end(), draw.anchors[c]) != alive.end());
      std::vector<oracle::P3> pts;
      for (std::size_t i : alive) pts.push_back(testutil::p3(cloud[i]));
      std::vector<std::size_t> expected;
      for (std::size_t pos : oracle::knn_scan(pts, testutil::p3(cloud[draw.anchors[c]]), 50)) {
        expected.push_back(alive[pos]);
      }
      EXPECT_EQ(draw.affected[c], expected);
      std::set<std::size_t> gone(expected.begin(), expected.end());
      std::erase_if(alive, [&](std::size_t i) { return gone.count(i) > 0; });
    }
    std::vector<Vec3> kept;
    for (std::size_t i : alive) kept.push_back(cloud[i]);
    EXPECT_EQ(out, PointCloud(kept));
    EXPECT_EQ(out.size(), 600u - 250u);
  }
}

TEST(CutoutTest, Errors) {
  Rng rng(1);
  EXPECT_THROW(cutout(random_cloud(50, 1), 1, 50, rng), InvalidArgument);
  EXPECT_THROW(cutout(random_cloud(50, 1), 0, 5, rng), InvalidArgument);
}

TEST(RotationTest, IsometryAndDeterminant) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PointCloud cloud = random_cloud(50, seed);
    Rng rng(seed);
    RotationDraw draw;
    const PointCloud out = random_rotation(cloud, 15.0, rng, &draw);
    EXPECT_NEAR(draw.matrix.determinant(), 1.0, 1e-12);
    EXPECT_LE(draw.angles_deg.cwiseAbs().maxCoeff(), 15.0);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      EXPECT_NEAR(out[i].norm(), cloud[i].norm(), 1e-9);
      for (std::size_t j = i + 1; j < cloud.size(); ++j) {
        EXPECT_NEAR((out[i] - out[j]).norm(), (cloud[i] - cloud[j]).norm(), 1e-9);
      }
    }
  }
}

TEST(RotationTest, MatrixComposition) {
  const Mat3 rz = rotation_from_angles(Vec3(0, 0, 90));
  EXPECT_LT((rz * Vec3(1, 0, 0) - Vec3(0, 1, 0)).norm(), 1e-15);
  const Vec3 a(5, -7, 11);
  const Mat3 r = rotation_from_angles(a);
  const Mat3 composed = rotation_from_angles(Vec3(0, 0, a.z())) * rotation_from_angles(Vec3(0, a.y(), 0)) *
                        rotation_from_angles(Vec3(a.x(), 0, 0));
  EXPECT_LT((r - composed).norm(), 1e-15);
}

TEST(RotationTest, TinyAngleIsIdentity) {
  const PointCloud cloud = random_cloud(100, 3);
  Rng rng(1);
  const PointCloud out = random_rotation(cloud, 1e-300, rng);
  for (std::size_t i = 0; i < cloud.size(); ++i) EXPECT_LT((out[i] - cloud[i]).norm(), 1e-12);
}

TEST(RotationTest, AngleBounds) {
  Rng rng(1);
  EXPECT_THROW(random_rotation(random_cloud(5, 1), 0.0, rng), InvalidArgument);
  EXPECT_THROW(random_rotation(random_cloud(5, 1), 16.0, rng), InvalidArgument);
}

TEST(ShearTest, ZUnchangedBitwise) {
  const PointCloud cloud = random_cloud(500, 7);
  Rng rng(2);
  ShearDraw draw;
  const PointCloud out = random_shear(cloud, 0.25, rng, &draw);
  EXPECT_LE(std::abs(draw.a), 0.25);
  EXPECT_LE(std::abs(draw.b), 0.25);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    EXPECT_EQ(out[i].z(), cloud[i].z());
    EXPECT_EQ(out[i].x(), cloud[i].x() + draw.a * cloud[i].z());
  }
}

TEST(ShearTest, PreservesHullVolume) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PointCloud cloud = random_cloud(20, 30 + seed);
    Rng rng(seed);
    const PointCloud out = random_shear(cloud, 0.25, rng);
    const double before = oracle::hull_volume(testutil::p3s(cloud));
    const double after = oracle::hull_volume(testutil::p3s(out));
    EXPECT_GT(before, 0.1);
    EXPECT_NEAR(after, before, 1e-6);
  }
}

TEST(ShearTest, TinyCoefficientIsIdentity) {
  const PointCloud cloud = random_cloud(100, 3);
  Rng rng(1);
  const PointCloud out = random_shear(cloud, 1e-300, rng);
  for (std::size_t i = 0; i < cloud.size(); ++i) EXPECT_LT((out[i] - cloud[i]).norm(), 1e-12);
}

}  // namespace
}  // namespace pcc
