// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pcc/geometry.hpp"

namespace pcc {

struct Neighbor {
  std::size_t index;  // position in the indexed cloud
  double distance;    // Euclidean

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Kd-tree over a point cloud for exact k-nearest-neighbor queries.
///
/// Results are ordered by (squared distance, index), so equidistant points
/// resolve to the lower index on every platform. Read-only after
/// construction and safe to share between threads.
class KnnIndex {
 public:
  explicit KnnIndex(const PointCloud& cloud, std::size_t leaf_size = 8);
  explicit KnnIndex(std::vector<Vec3> points, std::size_t leaf_size = 8);

  std::size_t size() const noexcept { return points_.size(); }
  const Vec3& point(std::size_t i) const { return points_[i]; }

  /// Throws InvalidArgument when k is zero or exceeds the cloud size.
  std::vector<Neighbor> query(const Vec3& q, std::size_t k) const;

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_;
};

inline std::vector<Neighbor> knn_query(const KnnIndex& index, const Vec3& q, std::size_t k) {
  return index.query(q, k);
}

}  // namespace pcc
