// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

namespace pcc {

enum class CorruptionKind : std::uint8_t {
  kOcclusion,
  kLidar,
  kDensityInc,
  kDensityDec,
  kCutout,
  kUniform,
  kGaussian,
  kImpulse,
  kUpsampling,
  kBackground,
  kRotation,
  kShear,
  kFfd,
  kRbf,
  kInvRbf,
};

inline constexpr std::size_t kCorruptionCount = 15;
inline constexpr int kSeverityLevels = 5;

inline constexpr std::array<CorruptionKind, kCorruptionCount> kAllCorruptions = {
    CorruptionKind::kOcclusion, CorruptionKind::kLidar,     CorruptionKind::kDensityInc, CorruptionKind::kDensityDec,
    CorruptionKind::kCutout,    CorruptionKind::kUniform,   CorruptionKind::kGaussian,   CorruptionKind::kImpulse,
    CorruptionKind::kUpsampling, CorruptionKind::kBackground, CorruptionKind::kRotation, CorruptionKind::kShear,
    CorruptionKind::kFfd,       CorruptionKind::kRbf,       CorruptionKind::kInvRbf,
};

constexpr std::size_t ordinal(CorruptionKind kind) { return static_cast<std::size_t>(kind); }

/// Stable lowercase names used in manifests, CSVs and severity tables.
std::string_view canonical_name(CorruptionKind kind);
/// Accepts canonical names case-insensitively.
std::optional<CorruptionKind> parse_corruption(std::string_view name);
bool requires_mesh(CorruptionKind kind);

enum class CorruptionGroup { kDensity, kNoise, kTransformation };
CorruptionGroup group_of(CorruptionKind kind);

/// Point count that is either fixed or floor(multiplier * n / divisor) for an
/// n-point input.
struct PointCount {
  std::size_t fixed = 0;
  std::size_t multiplier = 0;
  std::size_t divisor = 0;  // 0 selects `fixed`

  std::size_t resolve(std::size_t n) const { return divisor == 0 ? fixed : multiplier * n / divisor; }
  friend bool operator==(const PointCount&, const PointCount&) = default;
};

struct NoiseParams {
  double scale = 0.0;  // U half-width or Gaussian sigma
  friend bool operator==(const NoiseParams&, const NoiseParams&) = default;
};
struct ImpulseParams {
  PointCount count;
  double magnitude = 0.05;
  friend bool operator==(const ImpulseParams&, const ImpulseParams&) = default;
};
struct UpsamplingParams {
  PointCount count;
  double bound = 0.05;
  friend bool operator==(const UpsamplingParams&, const UpsamplingParams&) = default;
};
struct BackgroundParams {
  PointCount count;
  friend bool operator==(const BackgroundParams&, const BackgroundParams&) = default;
};
struct DensityParams {
  int clusters = 1;
  std::size_t cluster_size = 100;
  double fraction = 0.75;
  friend bool operator==(const DensityParams&, const DensityParams&) = default;
};
struct CutoutParams {
  int clusters = 1;
  std::size_t k = 50;
  friend bool operator==(const CutoutParams&, const CutoutParams&) = default;
};
struct RotationParams {
  double max_angle_deg = 0.0;
  friend bool operator==(const RotationParams&, const RotationParams&) = default;
};
struct ShearParams {
  double max_coeff = 0.0;
  friend bool operator==(const ShearParams&, const ShearParams&) = default;
};
struct DeformParams {
  double distance = 0.0;
  int resolution = 5;
  friend bool operator==(const DeformParams&, const DeformParams&) = default;
};
/// Occlusion and LiDAR: severity selects the view index.
struct ViewParams {
  int view = 1;
  friend bool operator==(const ViewParams&, const ViewParams&) = default;
};

using SeverityParams = std::variant<NoiseParams, ImpulseParams, UpsamplingParams, BackgroundParams, DensityParams,
                                    CutoutParams, RotationParams, ShearParams, DeformParams, ViewParams>;

/// Five parameter records per corruption kind.
class SeverityTable {
 public:
  /// Built-in defaults; see README for the values.
  static SeverityTable defaults();

  const SeverityParams& at(CorruptionKind kind, int severity) const;
  void set(CorruptionKind kind, int severity, SeverityParams params);

  /// Checks record types per kind and non-decreasing magnitudes. Throws
  /// InvalidArgument on violation.
  void validate() const;

  /// Dominant magnitude of a record for a reference cloud size (used by the
  /// monotonicity check).
  static double magnitude(const SeverityParams& params, std::size_t reference_points = 1024);

  nlohmann::json to_json() const;
  /// Starts from `base` and replaces every kind present in `doc`.
  static SeverityTable from_json(const nlohmann::json& doc, const SeverityTable& base = defaults());

  friend bool operator==(const SeverityTable&, const SeverityTable&) = default;

 private:
  std::array<std::array<SeverityParams, kSeverityLevels>, kCorruptionCount> rows_;
};

void check_severity(int severity);

}  // namespace pcc
