// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcc/severity_table.hpp"

#include <cctype>
#include <string>

#include "pcc/errors.hpp"

namespace pcc {
namespace {

constexpr std::array<std::string_view, kCorruptionCount> kNames = {
    "occlusion", "lidar",      "density_inc", "density_dec", "cutout", "uniform", "gaussian", "impulse",
    "upsampling", "background", "rotation",   "shear",       "ffd",    "rbf",     "inv_rbf",
};

// Which variant alternative each kind must hold.
std::size_t expected_alternative(CorruptionKind kind) {
  switch (kind) {
    case CorruptionKind::kOcclusion:
    case CorruptionKind::kLidar: return 9;
    case CorruptionKind::kDensityInc:
    case CorruptionKind::kDensityDec: return 4;
    case CorruptionKind::kCutout: return 5;
    case CorruptionKind::kUniform:
    case CorruptionKind::kGaussian: return 0;
    case CorruptionKind::kImpulse: return 1;
    case CorruptionKind::kUpsampling: return 2;
    case CorruptionKind::kBackground: return 3;
    case CorruptionKind::kRotation: return 6;
    case CorruptionKind::kShear: return 7;
    case CorruptionKind::kFfd:
    case CorruptionKind::kRbf:
    case CorruptionKind::kInvRbf: return 8;
  }
  return 0;
}

nlohmann::json count_to_json(const PointCount& c) {
  if (c.divisor == 0) return c.fixed;
  return {{"multiplier", c.multiplier}, {"divisor", c.divisor}};
}

PointCount count_from_json(const nlohmann::json& j) {
  if (j.is_number_unsigned() || j.is_number_integer()) return {j.get<std::size_t>(), 0, 0};
  return {0, j.at("multiplier").get<std::size_t>(), j.at("divisor").get<std::size_t>()};
}

nlohmann::json params_to_json(CorruptionKind kind, const SeverityParams& params) {
  return std::visit(
      [kind](const auto& p) -> nlohmann::json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NoiseParams>) {
          return {{kind == CorruptionKind::kGaussian ? "sigma" : "scale", p.scale}};
        } else if constexpr (std::is_same_v<T, ImpulseParams>) {
          return {{"count", count_to_json(p.count)}, {"magnitude", p.magnitude}};
        } else if constexpr (std::is_same_v<T, UpsamplingParams>) {
          return {{"count", count_to_json(p.count)}, {"bound", p.bound}};
        } else if constexpr (std::is_same_v<T, BackgroundParams>) {
          return {{"count", count_to_json(p.count)}};
        } else if constexpr (std::is_same_v<T, DensityParams>) {
          return {{"clusters", p.clusters}, {"cluster_size", p.cluster_size}, {"fraction", p.fraction}};
        } else if constexpr (std::is_same_v<T, CutoutParams>) {
          return {{"clusters", p.clusters}, {"k", p.k}};
        } else if constexpr (std::is_same_v<T, RotationParams>) {
          return {{"max_angle_deg", p.max_angle_deg}};
        } else if constexpr (std::is_same_v<T, ShearParams>) {
          return {{"max_coeff", p.max_coeff}};
        } else if constexpr (std::is_same_v<T, DeformParams>) {
          return {{"distance", p.distance}, {"resolution", p.resolution}};
        } else {
          return {{"view", p.view}};
        }
      },
      params);
}

SeverityParams params_from_json(CorruptionKind kind, const nlohmann::json& j, const SeverityParams& base) {
  switch (expected_alternative(kind)) {
    case 0: {
      auto p = std::get<NoiseParams>(base);
      p.scale = j.value(kind == CorruptionKind::kGaussian ? "sigma" : "scale", p.scale);
      return p;
    }
    case 1: {
      auto p = std::get<ImpulseParams>(base);
      if (j.contains("count")) p.count = count_from_json(j.at("count"));
      p.magnitude = j.value("magnitude", p.magnitude);
      return p;
    }
    case 2: {
      auto p = std::get<UpsamplingParams>(base);
      if (j.contains("count")) p.count = count_from_json(j.at("count"));
      p.bound = j.value("bound", p.bound);
      return p;
    }
    case 3: {
      auto p = std::get<BackgroundParams>(base);
      if (j.contains("count")) p.count = count_from_json(j.at("count"));
      return p;
    }
    case 4: {
      auto p = std::get<DensityParams>(base);
      p.clusters = j.value("clusters", p.clusters);
      p.cluster_size = j.value("cluster_size", p.cluster_size);
      p.fraction = j.value("fraction", p.fraction);
      return p;
    }
    case 5: {
      auto p = std::get<CutoutParams>(base);
      p.clusters = j.value("clusters", p.clusters);
      p.k = j.value("k", p.k);
      return p;
    }
    case 6: {
      auto p = std::get<RotationParams>(base);
      p.max_angle_deg = j.value("max_angle_deg", p.max_angle_deg);
      return p;
    }
    case 7: {
      auto p = std::get<ShearParams>(base);
      p.max_coeff = j.value("max_coeff", p.max_coeff);
      return p;
    }
    case 8: {
      auto p = std::get<DeformParams>(base);
      p.distance = j.value("distance", p.distance);
      p.resolution = j.value("resolution", p.resolution);
      return p;
    }
    default: {
      auto p = std::get<ViewParams>(base);
      p.view = j.value("view", p.view);
      return p;
    }
  }
}

}  // namespace

std::string_view canonical_name(CorruptionKind kind) { return kNames[ordinal(kind)]; }

std::optional<CorruptionKind> parse_corruption(std::string_view name) {
  std::string lowered(name);
  for (char& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (CorruptionKind kind : kAllCorruptions) {
    if (canonical_name(kind) == lowered) return kind;
  }
  return std::nullopt;
}

bool requires_mesh(CorruptionKind kind) {
  return kind == CorruptionKind::kOcclusion || kind == CorruptionKind::kLidar;
}

CorruptionGroup group_of(CorruptionKind kind) {
  const std::size_t i = ordinal(kind);
  if (i < 5) return CorruptionGroup::kDensity;
  if (i < 10) return CorruptionGroup::kNoise;
  return CorruptionGroup::kTransformation;
}

void check_severity(int severity) {
  if (severity < 1 || severity > kSeverityLevels) {
    throw InvalidArgument("severity " + std::to_string(severity) + " outside [1, 5]");
  }
}

SeverityTable SeverityTable::defaults() {
  constexpr double kUniform[] = {0.01, 0.02, 0.03, 0.04, 0.05};
  constexpr double kGaussian[] = {0.01, 0.015, 0.02, 0.025, 0.03};
  constexpr double kRotation[] = {3.0, 6.0, 9.0, 12.0, 15.0};
  constexpr double kShear[] = {0.05, 0.10, 0.15, 0.20, 0.25};
  constexpr double kDistance[] = {0.1, 0.2, 0.3, 0.4, 0.5};
  SeverityTable t;
  for (int s = 1; s <= kSeverityLevels; ++s) {
    const auto level = static_cast<std::size_t>(s);
    const auto i = level - 1;
    t.set(CorruptionKind::kOcclusion, s, ViewParams{s});
    t.set(CorruptionKind::kLidar, s, ViewParams{s});
    t.set(CorruptionKind::kDensityInc, s, DensityParams{s, 100, 0.75});
    t.set(CorruptionKind::kDensityDec, s, DensityParams{s, 100, 0.75});
    t.set(CorruptionKind::kCutout, s, CutoutParams{s, 50});
    t.set(CorruptionKind::kUniform, s, NoiseParams{kUniform[i]});
    t.set(CorruptionKind::kGaussian, s, NoiseParams{kGaussian[i]});
    t.set(CorruptionKind::kImpulse, s, ImpulseParams{{0, level, 40}, 0.05});
    t.set(CorruptionKind::kUpsampling, s, UpsamplingParams{{0, level, 10}, 0.05});
    t.set(CorruptionKind::kBackground, s, BackgroundParams{{20 * level, 0, 0}});
    t.set(CorruptionKind::kRotation, s, RotationParams{kRotation[i]});
    t.set(CorruptionKind::kShear, s, ShearParams{kShear[i]});
    t.set(CorruptionKind::kFfd, s, DeformParams{kDistance[i], 5});
    t.set(CorruptionKind::kRbf, s, DeformParams{kDistance[i], 5});
    t.set(CorruptionKind::kInvRbf, s, DeformParams{kDistance[i], 5});
  }
  return t;
}

const SeverityParams& SeverityTable::at(CorruptionKind kind, int severity) const {
  check_severity(severity);
  return rows_[ordinal(kind)][static_cast<std::size_t>(severity - 1)];
}

void SeverityTable::set(CorruptionKind kind, int severity, SeverityParams params) {
  check_severity(severity);
  if (params.index() != expected_alternative(kind)) {
    throw InvalidArgument("parameter record type does not match corruption " + std::string(canonical_name(kind)));
  }
  rows_[ordinal(kind)][static_cast<std::size_t>(severity - 1)] = params;
}

double SeverityTable::magnitude(const SeverityParams& params, std::size_t reference_points) {
  return std::visit(
      [reference_points](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, NoiseParams>) return p.scale;
        else if constexpr (std::is_same_v<T, ImpulseParams>) return static_cast<double>(p.count.resolve(reference_points));
        else if constexpr (std::is_same_v<T, UpsamplingParams>) return static_cast<double>(p.count.resolve(reference_points));
        else if constexpr (std::is_same_v<T, BackgroundParams>) return static_cast<double>(p.count.resolve(reference_points));
        else if constexpr (std::is_same_v<T, DensityParams>) return p.clusters * static_cast<double>(p.cluster_size) * p.fraction;
        else if constexpr (std::is_same_v<T, CutoutParams>) return p.clusters * static_cast<double>(p.k);
        else if constexpr (std::is_same_v<T, RotationParams>) return p.max_angle_deg;
        else if constexpr (std::is_same_v<T, ShearParams>) return p.max_coeff;
        else if constexpr (std::is_same_v<T, DeformParams>) return p.distance;
        else return static_cast<double>(p.view);
      },
      params);
}

void SeverityTable::validate() const {
  for (CorruptionKind kind : kAllCorruptions) {
    const auto& row = rows_[ordinal(kind)];
    for (int s = 0; s < kSeverityLevels; ++s) {
      if (row[s].index() != expected_alternative(kind)) {
        throw InvalidArgument("severity table entry for " + std::string(canonical_name(kind)) + " has wrong type");
      }
    }
    if (requires_mesh(kind)) {
      for (int s = 0; s < kSeverityLevels; ++s) {
        const int view = std::get<ViewParams>(row[s]).view;
        if (view < 1 || view > 5) throw InvalidArgument("view index outside [1, 5] for " + std::string(canonical_name(kind)));
      }
      continue;
    }
    for (int s = 1; s < kSeverityLevels; ++s) {
      if (magnitude(row[s]) < magnitude(row[s - 1])) {
        throw InvalidArgument("severity table for " + std::string(canonical_name(kind)) +
                              " is not non-decreasing at severity " + std::to_string(s + 1));
      }
    }
  }
}

nlohmann::json SeverityTable::to_json() const {
  nlohmann::json doc = nlohmann::json::object();
  for (CorruptionKind kind : kAllCorruptions) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& params : rows_[ordinal(kind)]) row.push_back(params_to_json(kind, params));
    doc[std::string(canonical_name(kind))] = std::move(row);
  }
  return doc;
}

SeverityTable SeverityTable::from_json(const nlohmann::json& doc, const SeverityTable& base) {
  if (!doc.is_object()) throw InvalidArgument("severity table must be a JSON object");
  SeverityTable t = base;
  for (const auto& [key, row] : doc.items()) {
    auto kind = parse_corruption(key);
    if (!kind) throw InvalidArgument("unknown corruption '" + key + "' in severity table");
    if (!row.is_array() || row.size() != kSeverityLevels) {
      throw InvalidArgument("severity table entry '" + key + "' must have exactly 5 records");
    }
    for (int s = 1; s <= kSeverityLevels; ++s) {
      try {
        t.set(*kind, s, params_from_json(*kind, row.at(static_cast<std::size_t>(s - 1)), base.at(*kind, s)));
      } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("severity table entry '" + key + "': " + e.what());
      }
    }
  }
  t.validate();
  return t;
}

}  // namespace pcc
