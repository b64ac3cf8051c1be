// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcc/deformation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "pcc/errors.hpp"

namespace pcc {

FfdLattice::FfdLattice(const Aabb& bounds, int resolution)
    : bounds_(bounds),
      resolution_(resolution),
      displacements_(static_cast<std::size_t>(resolution) * resolution * resolution, Vec3::Zero()) {}

Vec3 FfdLattice::rest_position(int i, int j, int k) const {
  return bounds_.min + spacing().cwiseProduct(Vec3(i, j, k));
}

std::vector<Vec3> FfdLattice::rest_positions() const {
  std::vector<Vec3> out;
  out.reserve(control_count());
  for (int i = 0; i < resolution_; ++i)
    for (int j = 0; j < resolution_; ++j)
      for (int k = 0; k < resolution_; ++k) out.push_back(rest_position(i, j, k));
  return out;
}

Vec3 FfdLattice::local_coordinates(const Vec3& p) const {
  const Vec3 u = (p - bounds_.min).cwiseQuotient(bounds_.extent());
  return u.cwiseMax(0.0).cwiseMin(1.0);
}

double bernstein(int degree, int i, double u) {
  double binom = 1.0;
  for (int m = 1; m <= i; ++m) binom = binom * (degree - i + m) / m;
  return binom * std::pow(u, i) * std::pow(1.0 - u, degree - i);
}

Vec3 FfdLattice::displacement_at(const Vec3& p) const {
  const Vec3 u = local_coordinates(p);
  const int degree = resolution_ - 1;
  std::vector<double> bu(resolution_), bv(resolution_), bw(resolution_);
  for (int i = 0; i < resolution_; ++i) {
    bu[i] = bernstein(degree, i, u.x());
    bv[i] = bernstein(degree, i, u.y());
    bw[i] = bernstein(degree, i, u.z());
  }
  Vec3 d = Vec3::Zero();
  for (int i = 0; i < resolution_; ++i)
    for (int j = 0; j < resolution_; ++j) {
      const double wij = bu[i] * bv[j];
      for (int k = 0; k < resolution_; ++k) d += (wij * bw[k]) * displacements_[index(i, j, k)];
    }
  return d;
}

FfdLattice make_ffd_lattice(const Aabb& bounds, int resolution) {
  if (resolution < 2) throw InvalidArgument("lattice resolution must be at least 2");
  if (!((bounds.extent().array() > 0.0).all())) throw GeometryError("lattice bounds are degenerate");
  return FfdLattice(bounds, resolution);
}

FfdLattice perturb_lattice(FfdLattice lattice, double distance, Rng& rng) {
  if (!(distance >= 0.0)) throw InvalidArgument("deformation distance must be non-negative");
  for (Vec3& d : lattice.displacements()) d = distance * rng.unit_vector();
  return lattice;
}

PointCloud apply_ffd(const PointCloud& cloud, const FfdLattice& lattice) {
  std::vector<Vec3> out;
  out.reserve(cloud.size());
  for (const Vec3& p : cloud) out.push_back(p + lattice.displacement_at(p));
  return PointCloud(std::move(out));
}

Aabb deformation_bounds(const PointCloud& cloud) { return Aabb::of(cloud.points()).merged(Aabb::cube(1.0)); }

double RbfKernel::operator()(double d) const {
  const double q = std::sqrt(d * d + shape * shape);
  return variant == RbfVariant::kMultiquadric ? q : 1.0 / q;
}

RbfDeformation::RbfDeformation(RbfKernel kernel, std::vector<Vec3> centers, std::vector<Vec3> displacements,
                               Eigen::MatrixX3d weights, double condition_estimate)
    : kernel_(kernel),
      centers_(std::move(centers)),
      displacements_(std::move(displacements)),
      weights_(std::move(weights)),
      condition_(condition_estimate) {}

Vec3 RbfDeformation::displacement_at(const Vec3& p) const {
  Vec3 d = Vec3::Zero();
  for (std::size_t a = 0; a < centers_.size(); ++a) {
    d += kernel_((p - centers_[a]).norm()) * weights_.row(static_cast<Eigen::Index>(a)).transpose();
  }
  return d;
}

RbfDeformation solve_rbf(std::vector<Vec3> centers, std::vector<Vec3> displacements, RbfKernel kernel) {
  if (!(kernel.shape > 0.0)) throw InvalidArgument("RBF shape parameter must be positive");
  if (centers.empty()) throw InvalidArgument("RBF needs at least one center");
  if (centers.size() != displacements.size()) throw InvalidArgument("one displacement per RBF center required");
  const auto n = static_cast<Eigen::Index>(centers.size());
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a + 1; b < n; ++b)
      if (centers[a] == centers[b]) {
        throw InvalidArgument("RBF centers " + std::to_string(a) + " and " + std::to_string(b) + " coincide");
      }

  Eigen::MatrixXd phi(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) phi(a, b) = kernel((centers[a] - centers[b]).norm());
  Eigen::MatrixX3d rhs(n, 3);
  for (Eigen::Index a = 0; a < n; ++a) rhs.row(a) = displacements[a].transpose();

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(phi);
  const double rcond = lu.rcond();
  if (!(rcond * kMaxRbfCondition >= 1.0)) {
    throw IllConditioned("RBF interpolation matrix condition estimate " + std::to_string(1.0 / rcond) +
                         " exceeds 1e12");
  }
  Eigen::MatrixX3d weights = lu.solve(rhs);
  return RbfDeformation(kernel, std::move(centers), std::move(displacements), std::move(weights), 1.0 / rcond);
}

PointCloud apply_rbf(const PointCloud& cloud, const RbfDeformation& deformation) {
  std::vector<Vec3> out;
  out.reserve(cloud.size());
  for (const Vec3& p : cloud) out.push_back(p + deformation.displacement_at(p));
  return PointCloud(std::move(out));
}

}  // namespace pcc
