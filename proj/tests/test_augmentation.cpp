// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pcc/augmentation.hpp"
#include "pcc/errors.hpp"
#include "test_util.hpp"

namespace pcc {
namespace {

using testutil::random_cloud;

using Key = std::tuple<double, double, double>;
Key key(const Vec3& p) { return {p.x(), p.y(), p.z()}; }

std::multiset<Key> keys(const PointCloud& c) {
  std::multiset<Key> out;
  for (const Vec3& p : c) out.insert(key(p));
  return out;
}

LabeledCloud labeled(std::size_t n, std::uint64_t seed, std::size_t label) {
  return {random_cloud(n, seed), one_hot(label, 8)};
}

double label_sum(const SoftLabel& y) { return std::accumulate(y.begin(), y.end(), 0.0); }

TEST(MixLabelsTest, Examples) {
  const SoftLabel y = mix_labels(one_hot(2, 8), one_hot(5, 8), 0.5);
  EXPECT_EQ(y[2], 0.5);
  EXPECT_EQ(y[5], 0.5);
  EXPECT_EQ(label_sum(y), 1.0);
  const SoftLabel a{0.2, 0.3, 0.5};
  EXPECT_EQ(mix_labels(a, {1, 0, 0}, 1.0), a);
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const SoftLabel m = mix_labels(a, {0.6, 0.1, 0.3}, rng.uniform());
    EXPECT_NEAR(label_sum(m), 1.0, 1e-12);
  }
  EXPECT_THROW(mix_labels({1, 0}, {1, 0, 0}, 0.5), InvalidArgument);
  EXPECT_THROW(mix_labels({1, 0}, {0, 1}, 1.5), InvalidArgument);
}

TEST(CutmixRTest, HalfFromEachParent) {
  const LabeledCloud a = labeled(1024, 1, 0), b = labeled(1024, 2, 3);
  const LabeledCloud out = cutmix_r(a, b, {0.5, 7});
  ASSERT_EQ(out.cloud.size(), 1024u);
  const auto ka = keys(a.cloud), kb = keys(b.cloud);
  std::size_t from_a = 0, from_b = 0;
  for (const Vec3& p : out.cloud) {
    if (ka.count(key(p))) ++from_a;
    else if (kb.count(key(p))) ++from_b;
  }
  EXPECT_EQ(from_a, 512u);
  EXPECT_EQ(from_b, 512u);
  EXPECT_EQ(keys(out.cloud).size(), 1024u);
  EXPECT_EQ(out.label[0], 0.5);
  EXPECT_EQ(out.label[3], 0.5);
}

TEST(CutmixRTest, LambdaOneReturnsA) {
  const LabeledCloud a = labeled(200, 1, 0), b = labeled(200, 2, 3);
  const LabeledCloud out = cutmix_r(a, b, {1.0, 7});
  EXPECT_EQ(keys(out.cloud), keys(a.cloud));
  EXPECT_EQ(out.label, a.label);
}

TEST(CutmixRTest, SizeMismatch) {
  EXPECT_THROW(cutmix_r(labeled(10, 1, 0), labeled(11, 2, 1), {}), InvalidArgument);
}

TEST(CutmixKTest, APartIsKnnOracleSet) {
  const LabeledCloud a = labeled(300, 1, 0), b = labeled(300, 2, 1);
  for (double lambda = 0.1; lambda < 0.95; lambda += 0.1) {
    std::size_t anchor = 0;
    const LabeledCloud out = cutmix_k(a, b, {lambda, 3}, &anchor);
    ASSERT_EQ(out.cloud.size(), 300u);
    const auto m = static_cast<std::size_t>(std::floor(lambda * 300));
    const auto pa = testutil::p3s(a.cloud);
    auto expected = oracle::knn_scan(pa, pa[anchor], m);
    std::sort(expected.begin(), expected.end());
    for (std::size_t i = 0; i < m; ++i) EXPECT_EQ(out.cloud[i], a.cloud[expected[i]]);
    const auto pb = testutil::p3s(b.cloud);
    auto rest = oracle::knn_scan(pb, pa[anchor], 300);
    std::vector<std::size_t> tail(rest.begin() + static_cast<std::ptrdiff_t>(m), rest.end());
    std::sort(tail.begin(), tail.end());
    for (std::size_t i = 0; i < tail.size(); ++i) EXPECT_EQ(out.cloud[m + i], b.cloud[tail[i]]);
    EXPECT_NEAR(out.label[0], static_cast<double>(m) / 300.0, 1e-15);
    EXPECT_NEAR(label_sum(out.label), 1.0, 1e-12);
  }
}

TEST(CutmixKTest, LambdaOneReturnsA) {
  const LabeledCloud a = labeled(128, 1, 0), b = labeled(128, 2, 1);
  EXPECT_EQ(cutmix_k(a, b, {1.0, 3}).cloud, a.cloud);
}

TEST(EmdAssignTest, RecoversKnownPermutation) {
  const PointCloud a = random_cloud(100, 4);
  std::vector<std::size_t> sigma(100);
  std::iota(sigma.begin(), sigma.end(), 0u);
  Rng rng(2);
  std::shuffle(sigma.begin(), sigma.end(), rng);
  std::vector<Vec3> shuffled(100);
  for (std::size_t i = 0; i < 100; ++i) shuffled[sigma[i]] = a[i];
  const PointCloud b(shuffled);
  const Permutation pi = emd_assign(a, b);
  EXPECT_EQ(pi, sigma);
  EXPECT_EQ(assignment_cost(a, b, pi), 0.0);
}

TEST(EmdAssignTest, MatchesFactorialBruteForce) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 6;
    const PointCloud a = random_cloud(n, rng.next()), b = random_cloud(n, rng.next());
    const Permutation pi = emd_assign(a, b);
    std::vector<std::size_t> sorted = pi;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(sorted[i], i);
    EXPECT_EQ(assignment_cost(a, b, pi), oracle::brute_force_assignment(testutil::p3s(a), testutil::p3s(b)))
        << "n=" << n;
  }
}

TEST(EmdAssignTest, NeverWorseThanIdentity) {
  for (std::size_t n : {50u, 300u}) {
    const PointCloud a = random_cloud(n, n), b = random_cloud(n, n + 1);
    Permutation id(n);
    std::iota(id.begin(), id.end(), 0u);
    EXPECT_LE(assignment_cost(a, b, emd_assign(a, b)), assignment_cost(a, b, id));
  }
  EXPECT_THROW(emd_assign(random_cloud(3, 1), random_cloud(4, 1)), InvalidArgument);
}

TEST(MixupEmdTest, EndpointsAndCollinearity) {
  const LabeledCloud a = labeled(64, 1, 0), b = labeled(64, 2, 1);
  EXPECT_EQ(mixup_emd(a, b, {1.0, 0}).cloud, a.cloud);
  EXPECT_EQ(keys(mixup_emd(a, b, {0.0, 0}).cloud), keys(b.cloud));
  const LabeledCloud out = mixup_emd(a, b, {0.3, 0});
  const Permutation pi = emd_assign(a.cloud, b.cloud);
  for (std::size_t i = 0; i < 64; ++i) {
    const Vec3 ab = b.cloud[pi[i]] - a.cloud[i];
    const Vec3 ap = out.cloud[i] - a.cloud[i];
    EXPECT_LT(ab.cross(ap).norm(), 1e-12);
    EXPECT_NEAR(ap.norm(), 0.7 * ab.norm(), 1e-12);
  }
  EXPECT_NEAR(out.label[0], 0.3, 1e-15);
}

TEST(MixupEmdTest, SelfMixIsIdentity) {
  const LabeledCloud a = labeled(100, 3, 2);
  for (double lambda : {0.0, 0.25, 0.5, 0.9}) EXPECT_EQ(mixup_emd(a, a, {lambda, 1}).cloud, a.cloud);
}

TEST(RsmixTest, MatchesOracleSets) {
  const LabeledCloud a = labeled(400, 5, 0), b = labeled(400, 6, 1);
  RsmixDraw draw;
  const LabeledCloud out = rsmix(a, b, {0.5, 9}, &draw);
  ASSERT_EQ(out.cloud.size(), 400u);
  EXPECT_EQ(draw.region, 200u);
  const auto pa = testutil::p3s(a.cloud), pb = testutil::p3s(b.cloud);
  const auto removed = oracle::knn_scan(pa, pa[draw.anchor_a], 200);
  const auto inserted = oracle::knn_scan(pb, pb[draw.anchor_b], 200);
  std::multiset<Key> expected;
  const std::set<std::size_t> gone(removed.begin(), removed.end());
  for (std::size_t i = 0; i < 400; ++i)
    if (!gone.count(i)) expected.insert(key(a.cloud[i]));
  const Vec3 shift = a.cloud[draw.anchor_a] - b.cloud[draw.anchor_b];
  EXPECT_EQ(draw.translation, shift);
  for (std::size_t i : inserted) expected.insert(key(b.cloud[i] + shift));
  EXPECT_EQ(keys(out.cloud), expected);
  EXPECT_EQ(out.label[0], 0.5);
}

TEST(RsmixTest, InsertedSubsetIsRigid) {
  const LabeledCloud a = labeled(256, 5, 0), b = labeled(256, 6, 1);
  RsmixDraw draw;
  const LabeledCloud out = rsmix(a, b, {0.25, 4}, &draw);
  const auto inserted = oracle::knn_scan(testutil::p3s(b.cloud), testutil::p3(b.cloud[draw.anchor_b]), 64);
  std::vector<std::size_t> sorted(inserted.begin(), inserted.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t base = 256 - 64;
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t j = i + 1; j < 64; ++j) {
      EXPECT_NEAR((out.cloud[base + i] - out.cloud[base + j]).norm(),
                  (b.cloud[sorted[i]] - b.cloud[sorted[j]]).norm(), 1e-12);
    }
}

TEST(RsmixTest, ZeroRegionLeavesA) {
  const LabeledCloud a = labeled(100, 5, 0), b = labeled(100, 6, 1);
  const LabeledCloud out = rsmix(a, b, {0.001, 4});
  EXPECT_EQ(out.cloud, a.cloud);
  EXPECT_EQ(out.label, a.label);
}

TEST(MixTest, AllKindsKeepSizeAndValidLabel) {
  const LabeledCloud a = labeled(256, 7, 1), b = labeled(256, 8, 4);
  for (AugmentationKind k : {AugmentationKind::kNone, AugmentationKind::kCutmixR, AugmentationKind::kCutmixK,
                             AugmentationKind::kMixup, AugmentationKind::kRsmix}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const LabeledCloud out = mix(k, a, b, {0.5, seed});
      EXPECT_EQ(out.cloud.size(), 256u);
      EXPECT_NEAR(label_sum(out.label), 1.0, 1e-9);
      for (double v : out.label) EXPECT_GE(v, 0.0);
    }
    EXPECT_EQ(parse_augmentation(augmentation_name(k)), k);
  }
  EXPECT_FALSE(parse_augmentation("mixmatch").has_value());
}

TEST(MixTest, BetaLambdaInRangeAndDeterministic) {
  const LabeledCloud a = labeled(100, 7, 1), b = labeled(100, 8, 4);
  MixSpec spec{0.5, 3, 0.4};
  const LabeledCloud x = cutmix_r(a, b, spec), y = cutmix_r(a, b, spec);
  EXPECT_EQ(x.cloud, y.cloud);
  EXPECT_GE(x.label[1], 0.0);
  EXPECT_LE(x.label[1], 1.0);
}

}  // namespace
}  // namespace pcc
