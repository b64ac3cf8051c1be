// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "pcc/corruption.hpp"
#include "pcc/digest.hpp"
#include "pcc/errors.hpp"
#include "pcc/mesh_io.hpp"
#include "pcc/rng.hpp"

namespace pcc {

namespace fs = std::filesystem;

void RunConfig::validate() const {
  if (kinds.empty()) throw InvalidArgument("corruption selection is empty");
  if (severities.empty()) throw InvalidArgument("severity selection is empty");
  for (int s : severities) check_severity(s);
  for (int v : views) check_severity(v);
  if (points < 64) throw InvalidArgument("point budget must be at least 64");
  if (input_dir.empty() || output_dir.empty()) throw InvalidArgument("input and output directories are required");
}

const std::vector<int>& RunConfig::levels_for(CorruptionKind kind) const {
  return requires_mesh(kind) && !views.empty() ? views : severities;
}

const std::vector<int>& DatasetManifest::levels_for(CorruptionKind kind) const {
  return requires_mesh(kind) && !views.empty() ? views : severities;
}

namespace {

constexpr std::uint64_t kSamplingTag = 0x73616d706c65ULL;

std::string lower_ext(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return e;
}

template <typename F>
void parallel_for(std::size_t n, unsigned workers, F&& body) {
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
  };
  const std::size_t threads = std::min<std::size_t>(std::max(1u, workers), n);
  if (threads <= 1) {
    run();
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run);
}

void emit(const LogSink& log, nlohmann::json event) {
  if (log) log(event);
}

std::string corrupted_stem(CorruptionKind kind, int severity, const std::string& id) {
  return std::string(canonical_name(kind)) + "/" + std::to_string(severity) + "/" + id;
}

}  // namespace

std::vector<SourceFile> discover_inputs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InvalidArgument("input directory not found: " + dir.string());
  std::vector<SourceFile> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = lower_ext(entry.path());
    if (ext != ".off" && ext != ".ply" && ext != ".bin" && ext != ".raw") continue;
    SourceFile s;
    s.path = entry.path();
    fs::path rel = fs::relative(entry.path(), dir);
    s.id = rel.replace_extension().generic_string();
    const fs::path parent = fs::relative(entry.path(), dir).parent_path();
    s.class_name = parent.empty() ? std::string() : parent.filename().string();
    s.is_mesh = ext == ".off";
    out.push_back(std::move(s));
  }
  if (out.empty()) throw InvalidArgument("no .off/.ply/.bin/.raw inputs under " + dir.string());
  std::sort(out.begin(), out.end(), [](const SourceFile& a, const SourceFile& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].id == out[i - 1].id) throw InvalidArgument("two inputs share sample id '" + out[i].id + "'");
  }
  return out;
}

PreparedSample prepare_sample(const SourceFile& source, std::size_t points, std::uint64_t seed) {
  PreparedSample s{source.id, source.class_name, PointCloud(), std::nullopt};
  if (source.is_mesh) {
    const TriangleMesh mesh = load_mesh(source.path);
    const PointCloud raw = sample_surface(mesh, points, mix_keys({seed, fnv1a64(source.id), kSamplingTag}));
    const NormalizeTransform t = unit_sphere_transform(raw);
    s.cloud = transform_cloud(raw, t);
    s.mesh = transform_mesh(mesh, t);
  } else {
    s.cloud = normalize_unit_sphere(load_cloud(source.path));
  }
  return s;
}

std::optional<std::size_t> DatasetManifest::label_of(const std::string& class_name) const {
  const auto it = std::lower_bound(class_names.begin(), class_names.end(), class_name);
  if (it == class_names.end() || *it != class_name) return std::nullopt;
  return static_cast<std::size_t>(it - class_names.begin());
}

nlohmann::json DatasetManifest::to_json() const {
  nlohmann::json doc;
  doc["manifest_version"] = kManifestVersion;
  doc["tool_version"] = tool_version;
  doc["root"] = ".";
  doc["seed"] = seed;
  doc["points"] = points;
  doc["severity_table_digest"] = severity_table_digest;
  nlohmann::json k = nlohmann::json::array();
  for (CorruptionKind kind : kinds) k.push_back(canonical_name(kind));
  doc["kinds"] = k;
  doc["severities"] = severities;
  doc["views"] = views;
  doc["class_names"] = class_names;
  nlohmann::json samples_json = nlohmann::json::array();
  for (const ManifestSample& s : samples) {
    nlohmann::json c = nlohmann::json::array();
    for (const CorruptedEntry& e : s.corrupted) {
      c.push_back({{"kind", canonical_name(e.kind)},
                   {"severity", e.severity},
                   {"cloud", e.cloud},
                   {"sidecar", e.sidecar},
                   {"digest", e.digest}});
    }
    samples_json.push_back({{"id", s.id},
                            {"class_name", s.class_name},
                            {"clean", s.clean},
                            {"clean_digest", s.clean_digest},
                            {"corrupted", c}});
  }
  doc["samples"] = samples_json;
  doc["failed_samples"] = failed_samples;
  return doc;
}

DatasetManifest DatasetManifest::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("manifest_version").get<int>() != kManifestVersion) {
      throw ParseError(ParseErrorKind::kMalformedHeader, 0, "unsupported manifest_version");
    }
    auto kind_of = [](const nlohmann::json& j) {
      const auto k = parse_corruption(j.get<std::string>());
      if (!k) throw ParseError(ParseErrorKind::kInvalidValue, 0, "unknown corruption " + j.dump());
      return *k;
    };
    DatasetManifest m;
    m.tool_version = doc.at("tool_version").get<std::string>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.points = doc.at("points").get<std::size_t>();
    m.severity_table_digest = doc.at("severity_table_digest").get<std::string>();
    for (const auto& k : doc.at("kinds")) m.kinds.push_back(kind_of(k));
    m.severities = doc.at("severities").get<std::vector<int>>();
    m.views = doc.at("views").get<std::vector<int>>();
    m.class_names = doc.at("class_names").get<std::vector<std::string>>();
    for (const auto& s : doc.at("samples")) {
      ManifestSample ms;
      ms.id = s.at("id").get<std::string>();
      ms.class_name = s.at("class_name").get<std::string>();
      ms.clean = s.at("clean").get<std::string>();
      ms.clean_digest = s.at("clean_digest").get<std::string>();
      for (const auto& e : s.at("corrupted")) {
        ms.corrupted.push_back({kind_of(e.at("kind")), e.at("severity").get<int>(), e.at("cloud").get<std::string>(),
                                e.at("sidecar").get<std::string>(), e.at("digest").get<std::string>()});
      }
      m.samples.push_back(std::move(ms));
    }
    m.failed_samples = doc.value("failed_samples", std::vector<std::string>{});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseErrorKind::kInvalidValue, 0, std::string("manifest: ") + e.what());
  }
}

DatasetManifest load_manifest(const fs::path& path) {
  try {
    return DatasetManifest::from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(ParseErrorKind::kMalformedHeader, 0, "manifest " + path.string() + ": " + e.what());
  }
}

std::vector<std::string> verify_manifest(const DatasetManifest& manifest, const fs::path& root) {
  std::vector<std::string> problems;
  auto check = [&](const std::string& rel, const std::string& digest) {
    const fs::path p = root / rel;
    if (!fs::exists(p)) {
      problems.push_back("missing " + rel);
    } else if (!digest.empty() && sha256_file(p) != digest) {
      problems.push_back("digest mismatch " + rel);
    }
  };
  for (const ManifestSample& s : manifest.samples) {
    check(s.clean, s.clean_digest);
    for (const CorruptedEntry& e : s.corrupted) {
      check(e.cloud, e.digest);
      check(e.sidecar, "");
    }
  }
  return problems;
}

std::string severity_table_digest(const SeverityTable& table) { return sha256_hex(table.to_json().dump()); }

GenerateResult run_generate(const RunConfig& config) {
  config.validate();
  SeverityTable table = SeverityTable::defaults();
  if (config.severity_table_path) {
    try {
      table = SeverityTable::from_json(nlohmann::json::parse(read_file(*config.severity_table_path)));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(ParseErrorKind::kMalformedHeader, 0, std::string("severity table: ") + e.what());
    }
  }
  table.validate();

  const std::vector<SourceFile> sources = discover_inputs(config.input_dir);
  const bool any_cloud = std::any_of(sources.begin(), sources.end(), [](const SourceFile& s) { return !s.is_mesh; });
  if (any_cloud) {
    std::vector<std::string> needing;
    for (CorruptionKind k : config.kinds)
      if (requires_mesh(k)) needing.emplace_back(canonical_name(k));
    if (!needing.empty()) {
      std::string list;
      for (const auto& n : needing) list += (list.empty() ? "" : ", ") + n;
      throw InvalidArgument("corruptions " + list + " (Occlusion/LiDAR) require mesh (.off) input, but cloud-only inputs were found");
    }
  }

  const fs::path out = config.output_dir;
  try {
    fs::create_directories(out);
    fs::remove(out / kManifestName);
  } catch (const fs::filesystem_error& e) {
    throw Error(std::string("output directory not writable: ") + e.what());
  }

  std::vector<std::optional<PreparedSample>> prepared(sources.size());
  std::vector<std::string> clean_digests(sources.size());
  std::vector<std::string> errors(sources.size());
  std::mutex error_mutex;
  auto record_error = [&](std::size_t sample, const std::string& what) {
    std::lock_guard lock(error_mutex);
    if (errors[sample].empty()) errors[sample] = what;
  };

  parallel_for(sources.size(), config.workers, [&](std::size_t i) {
    try {
      PreparedSample s = prepare_sample(sources[i], config.points, config.seed);
      const std::string bytes = encode_ply(s.cloud);
      const fs::path p = out / ("clean/" + s.id + ".ply");
      fs::create_directories(p.parent_path());
      write_file(p, bytes);
      clean_digests[i] = sha256_hex(bytes);
      prepared[i] = std::move(s);
    } catch (const std::exception& e) {
      record_error(i, e.what());
    }
  });

  std::vector<std::pair<CorruptionKind, int>> cells;
  for (CorruptionKind kind : config.kinds) {
    for (int level : config.levels_for(kind)) cells.emplace_back(kind, level);
  }
  const std::size_t per_sample = cells.size();
  std::vector<std::optional<CorruptedEntry>> entries(sources.size() * per_sample);
  parallel_for(entries.size(), config.workers, [&](std::size_t t) {
    const std::size_t i = t / per_sample;
    if (!prepared[i]) return;
    const auto [kind, severity] = cells[t % per_sample];
    const PreparedSample& s = *prepared[i];
    try {
      const CorruptionInput input{s.cloud, s.mesh ? &*s.mesh : nullptr};
      const CorruptionResult r =
          apply_corruption(input, {kind, severity, config.seed}, table, fnv1a64(s.id), config.occlusion);
      const std::string stem = corrupted_stem(kind, severity, s.id);
      const std::string bytes = encode_ply(r.cloud);
      const fs::path cloud_path = out / (stem + ".ply");
      fs::create_directories(cloud_path.parent_path());
      write_file(cloud_path, bytes);
      nlohmann::json sidecar = {
          {"sample_id", s.id}, {"input_digest", clean_digests[i]}, {"provenance", r.provenance}};
      write_file(out / (stem + ".json"), sidecar.dump(2) + "\n");
      entries[t] = CorruptedEntry{kind, severity, stem + ".ply", stem + ".json", sha256_hex(bytes)};
    } catch (const std::exception& e) {
      record_error(i, std::string(canonical_name(kind)) + " severity " + std::to_string(severity) + ": " + e.what());
    }
  });

  GenerateResult result;
  DatasetManifest& m = result.manifest;
  m.seed = config.seed;
  m.points = config.points;
  m.severity_table_digest = severity_table_digest(table);
  m.kinds = config.kinds;
  m.severities = config.severities;
  m.views = config.views.empty() ? config.severities : config.views;
  std::set<std::string> classes;
  for (const SourceFile& s : sources) classes.insert(s.class_name);
  m.class_names.assign(classes.begin(), classes.end());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (!errors[i].empty()) {
      m.failed_samples.push_back(sources[i].id);
      emit(config.log, {{"level", "error"}, {"event", "sample_failed"}, {"sample", sources[i].id}, {"error", errors[i]}});
      continue;
    }
    ManifestSample ms{sources[i].id, sources[i].class_name, "clean/" + sources[i].id + ".ply", clean_digests[i], {}};
    for (std::size_t k = 0; k < per_sample; ++k) ms.corrupted.push_back(*entries[i * per_sample + k]);
    result.generated_clouds += per_sample;
    m.samples.push_back(std::move(ms));
  }
  write_file(out / kManifestName, m.to_json().dump(2) + "\n");
  emit(config.log, {{"level", "info"},
                    {"event", "generate_done"},
                    {"samples", m.samples.size()},
                    {"failed", m.failed_samples.size()},
                    {"clouds", result.generated_clouds}});
  return result;
}

BenchmarkResult run_benchmark(const fs::path& predictions, const fs::path& manifest_path, const fs::path& report_path,
                              ReportFormat format) {
  const DatasetManifest manifest = load_manifest(manifest_path);
  if (manifest.class_names.empty()) throw InvalidArgument("manifest lists no classes");
  const std::vector<PredictionRecord> records = ingest_predictions(predictions, manifest.class_names.size());
  if (records.empty()) throw InvalidArgument("prediction file has no rows");

  std::map<std::string, std::size_t> labels;
  for (const ManifestSample& s : manifest.samples) labels.emplace(s.id, *manifest.label_of(s.class_name));
  std::vector<std::string> orphans;
  for (const PredictionRecord& r : records) {
    const auto it = labels.find(r.sample_id);
    if (it == labels.end()) {
      orphans.push_back(r.sample_id);
    } else if (it->second != r.true_label) {
      throw InvalidArgument("sample '" + r.sample_id + "' has true_label " + std::to_string(r.true_label) +
                            " but the manifest class is " + std::to_string(it->second));
    }
  }
  if (!orphans.empty()) {
    std::string list;
    for (std::size_t i = 0; i < std::min<std::size_t>(orphans.size(), 5); ++i) list += (i ? ", " : "") + orphans[i];
    throw InvalidArgument(std::to_string(orphans.size()) + " prediction rows reference sample ids absent from the manifest: " + list);
  }

  BenchmarkResult result;
  result.report = aggregate(records, manifest.class_names.size());
  if (!result.report.clean.present) result.missing_cells.push_back("clean");
  for (CorruptionKind k : manifest.kinds) {
    for (int s : manifest.levels_for(k)) {
      if (!result.report.cell(s, k).present) {
        result.missing_cells.push_back(std::string(canonical_name(k)) + "/" + std::to_string(s));
      }
    }
  }
  write_file(report_path, render_report(result.report, format));
  return result;
}

}  // namespace pcc
