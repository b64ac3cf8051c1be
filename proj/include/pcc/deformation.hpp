// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "pcc/geometry.hpp"
#include "pcc/rng.hpp"

namespace pcc {

/// Regular control lattice for free-form deformation with Bernstein weights.
///
/// Control (i, j, k) rests at bounds.min + (i, j, k) * spacing and carries a
/// displacement vector. A fresh lattice has zero displacements.
class FfdLattice {
 public:
  FfdLattice(const Aabb& bounds, int resolution);

  int resolution() const noexcept { return resolution_; }
  const Aabb& bounds() const noexcept { return bounds_; }
  Vec3 spacing() const { return bounds_.extent() / static_cast<double>(resolution_ - 1); }
  std::size_t control_count() const noexcept { return displacements_.size(); }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>((i * resolution_ + j) * resolution_ + k);
  }
  Vec3 rest_position(int i, int j, int k) const;
  /// Rest positions in index() order.
  std::vector<Vec3> rest_positions() const;

  const std::vector<Vec3>& displacements() const noexcept { return displacements_; }
  std::vector<Vec3>& displacements() noexcept { return displacements_; }

  /// Normalized lattice coordinates of p, clamped to [0, 1]^3.
  Vec3 local_coordinates(const Vec3& p) const;
  /// Bernstein-weighted displacement at p.
  Vec3 displacement_at(const Vec3& p) const;

 private:
  Aabb bounds_;
  int resolution_;
  std::vector<Vec3> displacements_;
};

/// Bernstein basis polynomial C(degree, i) u^i (1-u)^(degree-i).
double bernstein(int degree, int i, double u);

/// Throws InvalidArgument for resolution < 2 and GeometryError for a box with
/// a zero-length side.
FfdLattice make_ffd_lattice(const Aabb& bounds, int resolution = 5);

/// Every control displacement becomes distance * (random unit vector).
FfdLattice perturb_lattice(FfdLattice lattice, double distance, Rng& rng);

PointCloud apply_ffd(const PointCloud& cloud, const FfdLattice& lattice);

/// Bounding box of the cloud grown to contain [-1, 1]^3.
Aabb deformation_bounds(const PointCloud& cloud);

enum class RbfVariant { kMultiquadric, kInverseMultiquadric };

/// phi(d) = sqrt(d^2 + r^2), or its reciprocal for the inverse variant.
struct RbfKernel {
  RbfVariant variant = RbfVariant::kMultiquadric;
  double shape = 1.0;  // r, strictly positive

  double operator()(double d) const;
};

/// Solved displacement interpolant: f(p) = sum_a w_a phi(|p - c_a|).
class RbfDeformation {
 public:
  RbfDeformation(RbfKernel kernel, std::vector<Vec3> centers, std::vector<Vec3> displacements,
                 Eigen::MatrixX3d weights, double condition_estimate);

  const RbfKernel& kernel() const noexcept { return kernel_; }
  const std::vector<Vec3>& centers() const noexcept { return centers_; }
  const std::vector<Vec3>& displacements() const noexcept { return displacements_; }
  const Eigen::MatrixX3d& weights() const noexcept { return weights_; }
  double condition_estimate() const noexcept { return condition_; }

  Vec3 displacement_at(const Vec3& p) const;

 private:
  RbfKernel kernel_;
  std::vector<Vec3> centers_;
  std::vector<Vec3> displacements_;
  Eigen::MatrixX3d weights_;
  double condition_;
};

inline constexpr double kMaxRbfCondition = 1e12;

/// Solves Phi w = D with partial-pivoting LU, one right-hand side per axis.
/// Throws InvalidArgument for empty or coincident centers and IllConditioned
/// when the reciprocal condition estimate implies a condition above 1e12.
RbfDeformation solve_rbf(std::vector<Vec3> centers, std::vector<Vec3> displacements, RbfKernel kernel);

PointCloud apply_rbf(const PointCloud& cloud, const RbfDeformation& deformation);

}  // namespace pcc
