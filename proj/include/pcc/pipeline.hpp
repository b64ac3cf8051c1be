// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcc/geometry.hpp"
#include "pcc/metrics.hpp"
#include "pcc/occlusion.hpp"
#include "pcc/severity_table.hpp"

namespace pcc {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kManifestName = "manifest.json";
inline constexpr int kManifestVersion = 1;

using LogSink = std::function<void(const nlohmann::json&)>;

struct RunConfig {
  std::filesystem::path input_dir;
  std::filesystem::path output_dir;
  std::vector<CorruptionKind> kinds{kAllCorruptions.begin(), kAllCorruptions.end()};
  std::vector<int> severities{1, 2, 3, 4, 5};
  /// View indices for Occlusion and LiDAR; empty follows `severities`.
  std::vector<int> views;
  std::size_t points = 1024;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::optional<std::filesystem::path> severity_table_path;
  OcclusionOptions occlusion;
  LogSink log;

  /// Throws InvalidArgument on empty selections, bad severities or a point
  /// budget below 64.
  void validate() const;
  const std::vector<int>& levels_for(CorruptionKind kind) const;
};

/// An input file: a mesh (.off) or a cloud (.ply, .bin, .raw). The sample id
/// is the path relative to the input root without extension; the class name
/// is the parent directory name.
struct SourceFile {
  std::filesystem::path path;
  std::string id;
  std::string class_name;
  bool is_mesh = false;
};

/// Sorted by id. Throws InvalidArgument if the directory holds no inputs.
std::vector<SourceFile> discover_inputs(const std::filesystem::path& dir);

struct PreparedSample {
  std::string id;
  std::string class_name;
  PointCloud cloud;                   // normalized to the unit sphere
  std::optional<TriangleMesh> mesh;   // same frame as `cloud`
};

/// Meshes are surface-sampled to `points`; both inputs are then normalized.
PreparedSample prepare_sample(const SourceFile& source, std::size_t points, std::uint64_t seed);

struct CorruptedEntry {
  CorruptionKind kind = CorruptionKind::kGaussian;
  int severity = 1;
  std::string cloud;    // relative to the dataset root
  std::string sidecar;
  std::string digest;   // SHA-256 of the cloud file
  friend bool operator==(const CorruptedEntry&, const CorruptedEntry&) = default;
};

struct ManifestSample {
  std::string id;
  std::string class_name;
  std::string clean;
  std::string clean_digest;
  std::vector<CorruptedEntry> corrupted;
  friend bool operator==(const ManifestSample&, const ManifestSample&) = default;
};

struct DatasetManifest {
  std::uint64_t seed = 0;
  std::size_t points = 1024;
  std::string severity_table_digest;
  std::string tool_version{kToolVersion};
  std::vector<CorruptionKind> kinds;
  std::vector<int> severities;
  std::vector<int> views;
  std::vector<std::string> class_names;  // sorted; label i is class_names[i]
  std::vector<ManifestSample> samples;
  std::vector<std::string> failed_samples;

  std::optional<std::size_t> label_of(const std::string& class_name) const;
  /// Severities generated for `kind` (views for Occlusion and LiDAR).
  const std::vector<int>& levels_for(CorruptionKind kind) const;
  nlohmann::json to_json() const;
  static DatasetManifest from_json(const nlohmann::json& doc);
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

DatasetManifest load_manifest(const std::filesystem::path& path);
/// Checks that every referenced file exists under `root` and matches its
/// digest. Returns the list of problems (empty when sound).
std::vector<std::string> verify_manifest(const DatasetManifest& manifest, const std::filesystem::path& root);

struct GenerateResult {
  DatasetManifest manifest;
  std::size_t generated_clouds = 0;
  bool partial() const { return !manifest.failed_samples.empty(); }
};

/// Generates every selected (kind, severity) for every input. Per-sample
/// failures are logged and listed in the manifest; the manifest is written
/// last so a crashed run leaves none.
GenerateResult run_generate(const RunConfig& config);

struct BenchmarkResult {
  MetricsReport report;
  std::vector<std::string> missing_cells;  // "kind/severity" or "clean"
};

/// Throws DataError-class exceptions (InvalidArgument) on orphan sample ids.
BenchmarkResult run_benchmark(const std::filesystem::path& predictions, const std::filesystem::path& manifest,
                              const std::filesystem::path& report, ReportFormat format);

std::string severity_table_digest(const SeverityTable& table);

}  // namespace pcc
