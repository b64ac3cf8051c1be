// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Every tolerance is a named constant below.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pcc/augmentation.hpp"
#include "pcc/corruption.hpp"
#include "pcc/deformation.hpp"
#include "pcc/knn.hpp"
#include "pcc/mesh_io.hpp"
#include "pcc/metrics.hpp"
#include "pcc/occlusion.hpp"
#include "pcc/pipeline.hpp"
#include "pcc/shapes.hpp"
#include "pcc/tiny_pointnet.hpp"
#include "recount.hpp"
#include "test_util.hpp"
#include "toy_model.hpp"

namespace {

using namespace pcc;
using testutil::p3;
using testutil::p3s;
using testutil::random_cloud;
namespace fs = std::filesystem;

constexpr double kCountBudgetSeconds = 10.0;
constexpr double kIsometryTol = 1e-9;
constexpr double kIdentityTol = 1e-10;
constexpr double kFfdBoundTol = 1e-9;
constexpr double kAffineTol = 1e-9;
constexpr double kRbfResidualTol = 1e-8;
constexpr double kSurfaceTol = 1e-9;
constexpr double kVisibilityPullback = 1e-6;
constexpr int kBvhRays = 10000;
constexpr std::size_t kMaxKnnPoints = 2000;
constexpr int kEmdTrials = 100;
constexpr double kFdStep = 1e-5;
constexpr double kFdRelTol = 1e-4;
constexpr double kFdFloor = 1e-6;  // denominator floor for near-zero gradients
constexpr double kPgdEpsilon = 0.05;
constexpr double kPgdStep = 0.01;
constexpr int kPgdSteps = 7;
constexpr int kPgdSamples = 200;
constexpr double kPgdRequired = 0.9;
constexpr int kTentBatches = 100;
constexpr double kTentRequired = 0.9;
constexpr double kBnMeanTol = 1e-6;
constexpr double kBnVarTol = 1e-3;
constexpr std::size_t kMetricRecords = 100000;
constexpr double kRateTol = 1e-15;
constexpr double kMaxCleanError = 0.15;
constexpr double kCorruptionRatio = 1.5;

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1 ----------------------------------------------------------------------

std::size_t expected_count(CorruptionKind k, int s) {
  const std::size_t n = 1024;
  switch (k) {
    case CorruptionKind::kDensityInc: return n + 75 * static_cast<std::size_t>(s);
    case CorruptionKind::kDensityDec: return n - 75 * static_cast<std::size_t>(s);
    case CorruptionKind::kCutout: return n - 50 * static_cast<std::size_t>(s);
    case CorruptionKind::kUpsampling: {
      static constexpr std::size_t kAdded[] = {102, 204, 307, 409, 512};
      return n + kAdded[s - 1];
    }
    case CorruptionKind::kBackground: return n + 20 * static_cast<std::size_t>(s);
    default: return n;
  }
}

void criterion_counts() {
  const auto t0 = std::chrono::steady_clock::now();
  const SeverityTable table = SeverityTable::defaults();
  const PointCloud cloud = testutil::sphere_cloud(1024, 1);
  int checked = 0, wrong = 0;
  for (CorruptionKind k : kAllCorruptions) {
    if (requires_mesh(k)) continue;
    for (int s = 1; s <= kSeverityLevels; ++s) {
      const std::size_t got = apply_corruption(cloud, {k, s, 7}, table, 3).cloud.size();
      ++checked;
      if (got != expected_count(k, s)) {
        ++wrong;
        std::printf("  %s s=%d: %zu != %zu\n", std::string(canonical_name(k)).c_str(), s, got, expected_count(k, s));
      }
    }
  }
  const double secs = seconds_since(t0);
  const bool examples = expected_count(CorruptionKind::kCutout, 3) == 874 &&
                        expected_count(CorruptionKind::kBackground, 3) == 1084;
  report(1, "corruption count contracts", wrong == 0 && checked == 65 && examples && secs < kCountBudgetSeconds,
         fmt("%d cells, %d mismatches, %.2f s", checked, wrong, secs));
}

// ---- 2 ----------------------------------------------------------------------

void criterion_isometry() {
  double worst = 0.0;
  int shear_fail = 0;
  for (std::uint64_t c = 0; c < 100; ++c) {
    const PointCloud cloud = random_cloud(256, 100 + c);
    Rng rng(c);
    const PointCloud rot = random_rotation(cloud, 15.0, rng);
    for (std::size_t i = 0; i < cloud.size(); ++i)
      for (std::size_t j = i + 1; j < cloud.size(); ++j)
        worst = std::max(worst, std::abs((rot[i] - rot[j]).norm() - (cloud[i] - cloud[j]).norm()));
    const PointCloud sh = random_shear(cloud, 0.25, rng);
    for (std::size_t i = 0; i < cloud.size(); ++i) shear_fail += sh[i].z() != cloud[i].z() ? 1 : 0;
  }
  report(2, "rotation isometry and shear z-invariance", worst <= kIsometryTol && shear_fail == 0,
         fmt("max distance change %.2e, shear z changes %d", worst, shear_fail));
}

// ---- 3 ----------------------------------------------------------------------

double max_shift(const PointCloud& a, const PointCloud& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[i] - b[i]).norm());
  return m;
}

void criterion_deformation() {
  double identity = 0.0, bound_excess = -1.0, affine = 0.0, residual = 0.0;
  for (std::uint64_t t = 0; t < 20; ++t) {
    const PointCloud cloud = random_cloud(512, 300 + t);
    const Aabb bounds = deformation_bounds(cloud);
    FfdLattice lattice = make_ffd_lattice(bounds, 5);
    identity = std::max(identity, max_shift(apply_ffd(cloud, lattice), cloud));
    const std::vector<Vec3> centers = lattice.rest_positions();
    const double r = lattice.spacing().minCoeff();
    const std::vector<Vec3> zeros(centers.size(), Vec3::Zero());
    for (RbfVariant v : {RbfVariant::kMultiquadric, RbfVariant::kInverseMultiquadric}) {
      identity = std::max(identity, max_shift(apply_rbf(cloud, solve_rbf(centers, zeros, {v, r})), cloud));
    }

    Rng rng(t);
    const FfdLattice perturbed = perturb_lattice(lattice, 0.1 * (1 + t % 5), rng);
    double dmax = 0.0;
    for (const Vec3& d : perturbed.displacements()) dmax = std::max(dmax, d.norm());
    const PointCloud moved = apply_ffd(cloud, perturbed);
    for (std::size_t i = 0; i < cloud.size(); ++i) bound_excess = std::max(bound_excess, (moved[i] - cloud[i]).norm() - dmax);

    Mat3 a;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a(i, j) = rng.uniform(-0.2, 0.2);
    const Vec3 b(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1));
    FfdLattice aff = lattice;
    for (std::size_t c = 0; c < centers.size(); ++c) aff.displacements()[c] = a * centers[c] + b;
    const PointCloud warped = apply_ffd(cloud, aff);
    for (std::size_t i = 0; i < cloud.size(); ++i)
      affine = std::max(affine, (warped[i] - (cloud[i] + a * cloud[i] + b)).norm());

    for (RbfVariant v : {RbfVariant::kMultiquadric, RbfVariant::kInverseMultiquadric}) {
      const RbfDeformation def = solve_rbf(centers, perturbed.displacements(), {v, r});
      for (std::size_t c = 0; c < centers.size(); ++c)
        residual = std::max(residual, (def.displacement_at(centers[c]) - perturbed.displacements()[c]).norm());
    }
  }
  const bool pass = identity <= kIdentityTol && bound_excess <= kFfdBoundTol && affine <= kAffineTol &&
                    residual < kRbfResidualTol;
  report(3, "deformation identity and bounds", pass,
         fmt("identity %.2e, FFD bound excess %.2e, affine %.2e, RBF residual %.2e", identity, bound_excess, affine,
             residual));
}

// ---- 4 ----------------------------------------------------------------------

double mesh_distance(const TriangleMesh& mesh, const Vec3& p) {
  double best = 1e300;
  for (std::size_t f = 0; f < mesh.face_count(); ++f)
    best = std::min(best, oracle::point_triangle_distance(p3(p), p3(mesh.corner(f, 0)), p3(mesh.corner(f, 1)),
                                                          p3(mesh.corner(f, 2))));
  return best;
}

bool visible(const TriangleMesh& mesh, const Vec3& origin, const Vec3& p) {
  const Vec3 dir = (p - origin).normalized();
  const double reach = (p - origin).norm() - kVisibilityPullback;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const auto t = oracle::ray_triangle(p3(origin), p3(dir), p3(mesh.corner(f, 0)), p3(mesh.corner(f, 1)),
                                        p3(mesh.corner(f, 2)), kRayEpsilon);
    if (t && *t < reach) return false;
  }
  return true;
}

void criterion_occlusion() {
  const SeverityTable table = SeverityTable::defaults();
  const toy::ShapeSet shapes = toy::shape_set(1, 1024, 41);
  std::size_t points = 0, off_surface = 0, hidden = 0;
  double worst = 0.0;
  int max_faces = 0;
  for (std::size_t m = 0; m < shapes.meshes.size(); ++m) {
    const TriangleMesh& mesh = shapes.meshes[m];
    max_faces = std::max(max_faces, static_cast<int>(mesh.face_count()));
    const CorruptionInput input{shapes.samples[m].cloud, &mesh};
    for (CorruptionKind k : {CorruptionKind::kOcclusion, CorruptionKind::kLidar}) {
      for (int view = 1; view <= kSeverityLevels; ++view) {
        const CorruptionResult r = apply_corruption(input, {k, view, 5}, table, m);
        const auto& pose = r.provenance.at("drawn");
        const ViewPose vp{pose.at("azimuth_deg").get<double>(), pose.at("elevation_deg").get<double>(),
                          pose.at("camera_distance").get<double>()};
        for (const Vec3& p : r.cloud) {
          ++points;
          const double d = mesh_distance(mesh, p);
          worst = std::max(worst, d);
          off_surface += d >= kSurfaceTol ? 1 : 0;
          hidden += visible(mesh, vp.position(), p) ? 0 : 1;
        }
      }
    }
  }

  const TriangleMesh mesh = shapes.meshes[3];
  const Bvh bvh(mesh);
  Rng rng(9);
  int mismatches = 0, hits = 0;
  for (int i = 0; i < kBvhRays; ++i) {
    const Vec3 o = 2.0 * rng.unit_vector();
    const Vec3 target(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8));
    const Ray ray(o, i % 4 == 0 ? rng.unit_vector() : Vec3(target - o));
    std::optional<std::pair<double, std::uint32_t>> best;
    for (std::uint32_t f = 0; f < mesh.face_count(); ++f) {
      const auto h = intersect_triangle(ray, mesh.corner(f, 0), mesh.corner(f, 1), mesh.corner(f, 2));
      if (h && (!best || h->t < best->first)) best = std::make_pair(h->t, f);
    }
    const auto got = bvh.nearest_hit(ray);
    hits += got ? 1 : 0;
    if (got.has_value() != best.has_value() || (got && (got->t != best->first || got->triangle != best->second)))
      ++mismatches;
  }
  const bool pass = max_faces <= 500 && off_surface == 0 && hidden == 0 && mismatches == 0 && points > 0;
  report(4, "occlusion soundness", pass,
         fmt("%zu points on meshes with <= %d faces, max distance %.1e, %zu hidden, BVH %d/%d rays hit, %d mismatches",
             points, max_faces, worst, hidden, hits, kBvhRays, mismatches));
}

// ---- 5 ----------------------------------------------------------------------

void criterion_knn_emd() {
  int knn_bad = 0, queries = 0;
  for (std::size_t n : {1u, 7u, 64u, 500u, 2000u}) {
    if (n > kMaxKnnPoints) continue;
    const PointCloud cloud = random_cloud(n, n);
    const auto pts = p3s(cloud);
    const KnnIndex index(cloud);
    Rng rng(n);
    for (int q = 0; q < 100; ++q) {
      const Vec3 query = q % 3 == 0 ? cloud[rng.below(n)] : Vec3(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2), 0.0);
      for (std::size_t k : {std::size_t{1}, std::min<std::size_t>(n, 10), std::min<std::size_t>(n, 50), n}) {
        const auto got = index.query(query, k);
        const auto want = oracle::knn_scan(pts, p3(query), k);
        ++queries;
        bool same = got.size() == want.size();
        for (std::size_t i = 0; same && i < k; ++i) same = got[i].index == want[i];
        knn_bad += same ? 0 : 1;
      }
    }
  }
  int emd_bad = 0;
  Rng rng(77);
  for (int t = 0; t < kEmdTrials; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(t % 7);
    const PointCloud a = random_cloud(n, rng.next()), b = random_cloud(n, rng.next());
    emd_bad += assignment_cost(a, b, emd_assign(a, b)) == oracle::brute_force_assignment(p3s(a), p3s(b)) ? 0 : 1;
  }
  report(5, "kNN and EMD oracles", knn_bad == 0 && emd_bad == 0,
         fmt("%d kNN queries with %d mismatches, %d EMD trials with %d mismatches", queries, knn_bad, kEmdTrials,
             emd_bad));
}

// ---- 6 ----------------------------------------------------------------------

double rel_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), kFdFloor}); }

void criterion_gradients() {
  const Architecture arch{{4, 5, 6}, 5, 3};
  double worst = 0.0;
  std::size_t checked = 0;
  for (Mode mode : {Mode::kTrain, Mode::kEval, Mode::kAdapt}) {
    for (std::uint64_t seed = 0; seed < 2; ++seed) {
      NetworkState s = init_network(arch, 50 + seed);
      Rng rng(seed);
      for (auto* bn : {&s.point_norms[0], &s.point_norms[1], &s.point_norms[2], &s.head_norm}) {
        for (Eigen::Index i = 0; i < bn->gamma.size(); ++i) {
          bn->gamma[i] = rng.uniform(0.5, 1.5);
          bn->beta[i] = rng.uniform(-0.5, 0.5);
          bn->running_mean[i] = rng.uniform(-0.2, 0.2);
          bn->running_var[i] = rng.uniform(0.5, 1.5);
        }
      }
      std::vector<PointCloud> clouds{random_cloud(5, 10 * seed + 1), random_cloud(4, 10 * seed + 2),
                                     random_cloud(6, 10 * seed + 3)};
      const std::vector<std::size_t> labels{0, 2, 1};
      auto loss_of = [&](const NetworkState& st, const std::vector<PointCloud>& cs) {
        return smoothed_cross_entropy(forward(st, cs, mode).logits, labels, 0.2).loss;
      };
      const ForwardCache cache = forward(s, clouds, mode);
      const Gradients g = backward(cache, s, smoothed_cross_entropy(cache.logits, labels, 0.2).dlogits);

      std::vector<double*> params;
      std::vector<double> analytic;
      for_each_tensor(s, [&](std::string_view, TensorRole role, auto& t) {
        if (!is_trainable(role)) return;
        for (Eigen::Index i = 0; i < t.size(); ++i) params.push_back(t.data() + i);
      });
      for_each_tensor(g.params, [&](std::string_view, TensorRole role, const auto& t) {
        if (!is_trainable(role)) return;
        for (Eigen::Index i = 0; i < t.size(); ++i) analytic.push_back(t.data()[i]);
      });
      for (std::size_t k = 0; k < params.size(); ++k) {
        const double keep = *params[k];
        *params[k] = keep + kFdStep;
        const double up = loss_of(s, clouds);
        *params[k] = keep - kFdStep;
        const double down = loss_of(s, clouds);
        *params[k] = keep;
        worst = std::max(worst, rel_error(analytic[k], (up - down) / (2 * kFdStep)));
        ++checked;
      }
      std::size_t row = 0;
      for (std::size_t b = 0; b < clouds.size(); ++b) {
        for (std::size_t i = 0; i < clouds[b].size(); ++i, ++row) {
          for (int axis = 0; axis < 3; ++axis) {
            auto moved = [&](double delta) {
              std::vector<Vec3> pts(clouds[b].begin(), clouds[b].end());
              pts[i][axis] += delta;
              std::vector<PointCloud> cs = clouds;
              cs[b] = PointCloud(pts);
              return loss_of(s, cs);
            };
            const double numeric = (moved(kFdStep) - moved(-kFdStep)) / (2 * kFdStep);
            worst = std::max(worst, rel_error(g.input(static_cast<Eigen::Index>(row), axis), numeric));
            ++checked;
          }
        }
      }
    }
  }
  report(6, "gradient correctness", worst < kFdRelTol,
         fmt("%zu gradients in train/eval/adapt modes, max relative error %.2e", checked, worst));
}

// ---- 7, 8 -------------------------------------------------------------------

struct ToyModel {
  toy::ShapeSet set;
  NetworkState state;
};

const ToyModel& toy_model() {
  static const ToyModel m = [] {
    ToyModel t{toy::shape_set(60, 1024, 2026), {}};
    t.state = toy::trained_small(t.set.samples, 15, 1);
    return t;
  }();
  return m;
}

void criterion_pgd() {
  const ToyModel& m = toy_model();
  int raised = 0;
  double worst = 0.0;
  for (int i = 0; i < kPgdSamples; ++i) {
    const TrainSample& s = m.set.samples[static_cast<std::size_t>(i) % m.set.samples.size()];
    PgdConfig cfg;
    cfg.epsilon = kPgdEpsilon;
    cfg.step = kPgdStep;
    cfg.steps = kPgdSteps;
    cfg.seed = static_cast<std::uint64_t>(i);
    PgdTrace trace;
    const PointCloud adv = pgd_attack(m.state, s.cloud, s.label, cfg, &trace);
    for (std::size_t p = 0; p < adv.size(); ++p) worst = std::max(worst, (adv[p] - s.cloud[p]).cwiseAbs().maxCoeff());
    raised += trace.final_loss >= trace.start_loss ? 1 : 0;
  }
  const double frac = static_cast<double>(raised) / kPgdSamples;
  report(7, "PGD contract", worst <= kPgdEpsilon && frac >= kPgdRequired,
         fmt("max |x_adv - x|_inf %.4f, loss raised on %d/%d (train accuracy %.3f)", worst, raised, kPgdSamples,
             toy::accuracy(m.state, m.set.samples)));
}

bool same_tensor(const auto& a, const auto& b) {
  return a.size() == b.size() && std::equal(a.data(), a.data() + a.size(), b.data());
}

void criterion_adaptation() {
  const ToyModel& m = toy_model();
  const SeverityTable table = SeverityTable::defaults();
  std::vector<CorruptionKind> kinds;
  for (CorruptionKind k : kAllCorruptions)
    if (!requires_mesh(k)) kinds.push_back(k);
  int decreased = 0, touched = 0;
  Rng rng(8);
  for (int t = 0; t < kTentBatches; ++t) {
    const CorruptionKind k = kinds[static_cast<std::size_t>(t) % kinds.size()];
    const int sev = 1 + t % kSeverityLevels;
    std::vector<PointCloud> batch;
    for (int i = 0; i < 8; ++i) {
      const auto& s = m.set.samples[rng.below(m.set.samples.size())];
      batch.push_back(apply_corruption(s.cloud, {k, sev, static_cast<std::uint64_t>(t)}, table, i).cloud);
    }
    const NetworkState base = bn_adapt(m.state, batch, 1.0);
    const NetworkState tent = tent_adapt(m.state, batch, {1e-3, 1});
    const double before = mean_entropy(logits(base, batch, Mode::kEval)).loss;
    const double after = mean_entropy(logits(tent, batch, Mode::kEval)).loss;
    decreased += after <= before ? 1 : 0;
    // Weights and the output bias must be bit-identical.
    for_each_tensor(tent, [&](std::string_view name, TensorRole role, const auto& x) {
      if (role != TensorRole::kWeight && role != TensorRole::kBias) return;
      for_each_tensor(m.state, [&](std::string_view n2, TensorRole, const auto& y) {
        if (n2 == name && !same_tensor(x, y)) ++touched;
      });
    });
  }

  std::vector<PointCloud> batch;
  for (std::size_t i = 0; i < 16; ++i) batch.push_back(m.set.samples[i].cloud);
  const NetworkState adapted = bn_adapt(m.state, batch, 1.0);
  const ForwardCache c = forward(adapted, batch, Mode::kEval);
  const Eigen::MatrixXd& xh = c.point[0].normalized;
  const Eigen::RowVectorXd mean = xh.colwise().mean();
  const Eigen::RowVectorXd var = (xh.rowwise() - mean).array().square().colwise().mean();
  const double mean_err = mean.cwiseAbs().maxCoeff();
  const double var_err = (var.array() - 1.0).abs().maxCoeff();

  const double frac = static_cast<double>(decreased) / kTentBatches;
  report(8, "adaptation contracts",
         touched == 0 && frac >= kTentRequired && mean_err < kBnMeanTol && var_err <= kBnVarTol,
         fmt("TENT entropy non-increasing on %d/%d batches, %d frozen tensors changed; BN mean %.1e, var error %.1e",
             decreased, kTentBatches, touched, mean_err, var_err));
}

// ---- 9 ----------------------------------------------------------------------

void criterion_metrics() {
  const std::size_t classes = 10;
  const auto records = recount::random_records(kMetricRecords, classes, 2026);
  const MetricsReport m = aggregate(records, classes);
  int count_bad = 0;
  double rate_err = 0.0;
  auto compare = [&](const CellStats& got, const recount::Cell& want) {
    count_bad += (got.total != want.total || got.wrong != want.wrong) ? 1 : 0;
    rate_err = std::max({rate_err, std::abs(got.er - want.er), std::abs(got.mer - want.mer)});
  };
  compare(m.clean, recount::scan(records, classes, std::nullopt, 0));
  for (CorruptionKind k : kAllCorruptions) {
    double er_sum = 0.0;
    for (int s = 1; s <= kSeverityLevels; ++s) {
      const recount::Cell c = recount::scan(records, classes, k, s);
      compare(m.cell(s, k), c);
      er_sum += c.er;
    }
    rate_err = std::max(rate_err, std::abs(m.kinds[ordinal(k)].er - er_sum / kSeverityLevels));
  }

  std::span<const PredictionRecord> all(records);
  MetricsAccumulator a(classes), b(classes), c(classes);
  a.add(all.subspan(0, 30000));
  b.add(all.subspan(30000, 45000));
  c.add(all.subspan(75000));
  MetricsAccumulator left = a, bc = b, right = a;
  left.merge(b);
  left.merge(c);
  bc.merge(c);
  right.merge(bc);
  const bool assoc = left == right && left.report() == m;
  report(9, "metrics oracle", count_bad == 0 && rate_err <= kRateTol && assoc,
         fmt("%zu records, %d count mismatches, max rate error %.1e, merge associative %s", kMetricRecords, count_bad,
             rate_err, assoc ? "yes" : "no"));
}

// ---- 10 ---------------------------------------------------------------------

void criterion_trend() {
  const auto t0 = std::chrono::steady_clock::now();
  const toy::ShapeSet data = toy::shape_set(250, 1024, 10);
  const std::vector<TrainSample> train_set(data.samples.begin(), data.samples.begin() + 800);
  const std::vector<TrainSample> test(data.samples.begin() + 800, data.samples.end());
  Architecture arch;
  arch.classes = 4;
  TrainConfig cfg;
  cfg.epochs = 8;
  cfg.batch_size = 32;
  cfg.train_points = 128;
  cfg.seed = 3;
  const NetworkState state = train(init_network(arch, 3), train_set, {}, cfg).state;
  const double train_secs = seconds_since(t0);

  const SeverityTable table = SeverityTable::defaults();
  MetricsAccumulator acc(4);
  std::vector<PointCloud> clouds;
  for (const auto& s : test) clouds.push_back(s.cloud);
  const auto clean_pred = predict(state, clouds);
  for (std::size_t i = 0; i < test.size(); ++i)
    acc.add({"t" + std::to_string(i), std::nullopt, 0, test[i].label, clean_pred[i], {}});
  int kinds = 0;
  for (CorruptionKind k : kAllCorruptions) {
    if (requires_mesh(k)) continue;
    ++kinds;
    for (int s = 1; s <= kSeverityLevels; ++s) {
      std::vector<PointCloud> corrupted;
      for (std::size_t i = 0; i < test.size(); ++i)
        corrupted.push_back(apply_corruption(test[i].cloud, {k, s, 11}, table, i).cloud);
      const auto pred = predict(state, corrupted);
      for (std::size_t i = 0; i < test.size(); ++i)
        acc.add({"t" + std::to_string(i), k, s, test[i].label, pred[i], {}});
    }
  }
  const MetricsReport r = acc.report();
  std::printf("  per-kind ER:");
  for (CorruptionKind k : kAllCorruptions)
    if (r.kinds[ordinal(k)].present)
      std::printf(" %s=%.3f", std::string(canonical_name(k)).c_str(), r.kinds[ordinal(k)].er);
  std::printf("\n");
  const bool pass = r.kinds_present == kinds && kinds == 13 && r.clean.er < kMaxCleanError &&
                    r.er_cor >= kCorruptionRatio * r.clean.er;
  report(10, "desk-scale corruption trend", pass,
         fmt("ER_clean %.4f, ER_cor %.4f over %d kinds, training %.1f s, total %.1f s", r.clean.er, r.er_cor, kinds,
             train_secs, seconds_since(t0)));
}

// ---- 11 ---------------------------------------------------------------------

int run_tool(const std::string& args) {
  const std::string cmd = std::string(PCC_TOOL_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::pair<std::string, std::string>> tree_bytes(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), root).string(), read_file(e.path()));
  std::sort(out.begin(), out.end());
  return out;
}

void criterion_reproducibility() {
  const fs::path root = fs::temp_directory_path() / "pcc_acceptance_gen";
  fs::remove_all(root);
  const fs::path in = root / "in";
  Rng rng(4);
  for (ShapeClass s : kAllShapes) {
    for (int i = 0; i < 2; ++i) {
      const fs::path p = in / std::string(shape_name(s)) / (std::to_string(i) + ".off");
      fs::create_directories(p.parent_path());
      write_file(p, write_off(make_shape(s, rng)));
    }
  }
  const std::string common = "gen --input " + in.string() + " --kinds all --seed 99 --points 1024";
  const int a = run_tool(common + " --workers 1 --output " + (root / "a").string());
  const int b = run_tool(common + " --workers 1 --output " + (root / "b").string());
  const int c = run_tool(common + " --workers 4 --output " + (root / "c").string());
  const auto ta = tree_bytes(root / "a"), tb = tree_bytes(root / "b"), tc = tree_bytes(root / "c");
  const bool pass = a == 0 && b == 0 && c == 0 && ta == tb && ta == tc && ta.size() > 8 * 75;
  report(11, "reproducible generation", pass,
         fmt("exit codes %d/%d/%d, %zu files per run, identical %s", a, b, c, ta.size(),
             ta == tb && ta == tc ? "yes" : "no"));
  fs::remove_all(root);
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria = {
      criterion_counts,   criterion_isometry, criterion_deformation, criterion_occlusion,
      criterion_knn_emd,  criterion_gradients, criterion_pgd,        criterion_adaptation,
      criterion_metrics,  criterion_trend,    criterion_reproducibility,
  };
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), "exception", false, e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
