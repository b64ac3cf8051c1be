// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcc/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>
#include <utility>

#include "pcc/errors.hpp"

namespace pcc {

KnnIndex::KnnIndex(const PointCloud& cloud, std::size_t leaf_size)
    : KnnIndex(std::vector<Vec3>(cloud.begin(), cloud.end()), leaf_size) {}

KnnIndex::KnnIndex(std::vector<Vec3> points, std::size_t leaf_size)
    : points_(std::move(points)), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), std::uint32_t{0});
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::int32_t KnnIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end, -1, -1, 0, 0.0});
  if (end - begin <= leaf_size_) return id;

  Vec3 lo = points_[order_[begin]];
  Vec3 hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  auto less = [&](std::uint32_t a, std::uint32_t b) {
    const double pa = points_[a][axis];
    const double pb = points_[b][axis];
    return pa < pb || (pa == pb && a < b);
  };
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, less);
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  return id;
}

std::vector<Neighbor> KnnIndex::query(const Vec3& q, std::size_t k) const {
  if (k == 0) throw InvalidArgument("k must be positive");
  if (k > points_.size()) {
    throw InvalidArgument("k=" + std::to_string(k) + " exceeds cloud size " + std::to_string(points_.size()));
  }
  // Max-heap on (squared distance, index): top() is the current worst.
  using Entry = std::pair<double, std::uint32_t>;
  std::priority_queue<Entry> heap;

  auto visit = [&](auto&& self, std::int32_t node_id) -> void {
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t idx = order_[i];
        const Entry e{(points_[idx] - q).squaredNorm(), idx};
        if (heap.size() < k) {
          heap.push(e);
        } else if (e < heap.top()) {
          heap.pop();
          heap.push(e);
        }
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    self(self, near);
    // Equal bound may still hold a lower-index tie, so prune only strictly.
    if (heap.size() < k || diff * diff <= heap.top().first) self(self, far);
  };
  visit(visit, 0);

  std::vector<Neighbor> out(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = {heap.top().second, std::sqrt(heap.top().first)};
    heap.pop();
  }
  return out;
}

}  // namespace pcc
