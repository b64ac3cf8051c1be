// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

// pccorrupt: corrupted dataset generation, tiny classifier training,
// evaluation with test-time adaptation, PGD attack and benchmark reports.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "pcc/checkpoint.hpp"
#include "pcc/corruption.hpp"
#include "pcc/digest.hpp"
#include "pcc/errors.hpp"
#include "pcc/mesh_io.hpp"
#include "pcc/metrics.hpp"
#include "pcc/pipeline.hpp"
#include "pcc/rng.hpp"
#include "pcc/shapes.hpp"
#include "pcc/tiny_pointnet.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kPartial = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void log_event(std::string_view level, std::string_view event, json fields = json::object()) {
  fields["level"] = level;
  fields["event"] = event;
  std::cerr << fields.dump() << '\n';
}

/// JSON config files: top-level keys set global options, objects named after
/// a subcommand set that subcommand's options.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    json j;
    for (const CLI::Option* opt : app->get_options({})) {
      if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
      const std::string name = opt->get_lnames()[0];
      if (opt->count() > 0) {
        const auto& r = opt->results();
        j[name] = r.size() == 1 ? json(r[0]) : json(r);
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::parse_error& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    return items(j, "", {});
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  std::vector<CLI::ConfigItem> items(const json& j, const std::string& name, std::vector<std::string> parents) const {
    std::vector<CLI::ConfigItem> out;
    if (j.is_object()) {
      if (!name.empty()) parents.push_back(name);
      for (auto it = j.begin(); it != j.end(); ++it) {
        auto sub = items(*it, it.key(), parents);
        out.insert(out.end(), sub.begin(), sub.end());
      }
      return out;
    }
    CLI::ConfigItem item;
    item.name = name;
    item.parents = parents;
    if (j.is_array()) {
      for (const json& v : j) item.inputs.push_back(scalar(v));
    } else if (j.is_null()) {
      throw CLI::ConversionError("config key '" + name + "' is null");
    } else {
      item.inputs.push_back(scalar(j));
    }
    out.push_back(std::move(item));
    return out;
  }
};

std::uint64_t env_seed() {
  const char* env = std::getenv("PC_CORRUPT_SEED");
  if (env == nullptr || *env == '\0') return 0;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used, 10);
    if (used != std::string_view(env).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("PC_CORRUPT_SEED is not an unsigned integer: '") + env + "'");
  }
}

std::vector<pcc::CorruptionKind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<pcc::CorruptionKind> out;
  for (const std::string& n : names) {
    if (n == "all") {
      out.assign(pcc::kAllCorruptions.begin(), pcc::kAllCorruptions.end());
      return out;
    }
    const auto k = pcc::parse_corruption(n);
    if (!k) throw UsageError("unknown corruption '" + n + "'");
    if (std::find(out.begin(), out.end(), *k) == out.end()) out.push_back(*k);
  }
  if (out.empty()) throw UsageError("no corruptions selected");
  return out;
}

pcc::SeverityTable load_table(const std::string& path) {
  if (path.empty()) return pcc::SeverityTable::defaults();
  pcc::SeverityTable table;
  try {
    table = pcc::SeverityTable::from_json(json::parse(pcc::read_file(path)));
  } catch (const json::parse_error& e) {
    throw pcc::ParseError(pcc::ParseErrorKind::kMalformedHeader, 0, std::string("severity table: ") + e.what());
  }
  table.validate();
  return table;
}

struct OcclusionFlags {
  double fov = 50.0;
  double camera_distance = 2.5;
  int beams = 32;
  int lidar_steps = 512;

  void add(CLI::App* app) {
    app->add_option("--fov", fov, "Camera field of view in degrees")->capture_default_str();
    app->add_option("--camera-distance", camera_distance, "Camera distance from the origin")->capture_default_str();
    app->add_option("--beams", beams, "LiDAR beam count")->capture_default_str();
    app->add_option("--lidar-steps", lidar_steps, "LiDAR azimuth steps per beam")->capture_default_str();
  }
  pcc::OcclusionOptions options() const {
    pcc::OcclusionOptions o;
    o.fov_deg = fov;
    o.camera_distance = camera_distance;
    o.lidar_beams = beams;
    o.lidar_azimuth_steps = lidar_steps;
    return o;
  }
};

pcc::SourceFile source_for(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return {path, path.stem().string(), path.parent_path().filename().string(), ext == ".off"};
}

// ---- gen ------------------------------------------------------------------

struct GenArgs {
  std::string input, output, severity_table;
  std::vector<std::string> kinds{"all"};
  std::vector<int> severities{1, 2, 3, 4, 5};
  std::vector<int> views;
  std::size_t points = 1024;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  OcclusionFlags occ;
};

int run_gen(const GenArgs& a) {
  pcc::RunConfig cfg;
  cfg.input_dir = a.input;
  cfg.output_dir = a.output;
  cfg.kinds = parse_kinds(a.kinds);
  cfg.severities = a.severities;
  cfg.views = a.views;
  cfg.points = a.points;
  cfg.seed = a.seed;
  cfg.workers = a.workers;
  if (!a.severity_table.empty()) cfg.severity_table_path = a.severity_table;
  cfg.occlusion = a.occ.options();
  cfg.log = [](const json& j) { std::cerr << j.dump() << '\n'; };
  const pcc::GenerateResult r = pcc::run_generate(cfg);
  std::cout << "generated " << r.generated_clouds << " corrupted clouds for " << r.manifest.samples.size()
            << " samples into " << a.output << "\n";
  if (r.partial()) {
    std::cout << r.manifest.failed_samples.size() << " samples failed; see the log\n";
    return kPartial;
  }
  return kOk;
}

// ---- apply ----------------------------------------------------------------

struct ApplyArgs {
  std::string input, output, kind, severity_table, provenance, sample_key;
  int severity = 1;
  std::size_t points = 1024;
  std::uint64_t seed = 0;
  bool ascii = false;
  bool no_normalize = false;
  OcclusionFlags occ;
};

int run_apply(const ApplyArgs& a) {
  const auto kinds = parse_kinds({a.kind});
  if (kinds.size() != 1) throw UsageError("apply takes exactly one corruption");
  pcc::check_severity(a.severity);
  const pcc::SeverityTable table = load_table(a.severity_table);
  const pcc::SourceFile src = source_for(a.input);
  std::optional<pcc::TriangleMesh> mesh;
  pcc::PointCloud cloud;
  if (a.no_normalize) {
    if (src.is_mesh) {
      mesh = pcc::load_mesh(src.path);
      cloud = pcc::sample_surface(*mesh, a.points, a.seed);
    } else {
      cloud = pcc::load_cloud(src.path);
    }
  } else {
    pcc::PreparedSample s = pcc::prepare_sample(src, a.points, a.seed);
    cloud = std::move(s.cloud);
    mesh = std::move(s.mesh);
  }
  const std::string key_text = a.sample_key.empty() ? src.id : a.sample_key;
  const pcc::CorruptionInput input{cloud, mesh ? &*mesh : nullptr};
  const pcc::CorruptionResult r =
      pcc::apply_corruption(input, {kinds[0], a.severity, a.seed}, table, pcc::fnv1a64(key_text), a.occ.options());
  pcc::save_cloud(a.output, r.cloud, a.ascii ? pcc::PlyEncoding::kAscii : pcc::PlyEncoding::kBinaryLittleEndian);
  if (!a.provenance.empty()) {
    const nlohmann::json sidecar = {{"sample_id", key_text},
                                    {"input_digest", pcc::sha256_hex(pcc::encode_ply(cloud))},
                                    {"provenance", r.provenance}};
    pcc::write_file(a.provenance, sidecar.dump(2) + "\n");
  }
  std::cout << pcc::canonical_name(kinds[0]) << " severity " << a.severity << ": " << cloud.size() << " -> "
            << r.cloud.size() << " points, written to " << a.output << "\n";
  return kOk;
}

// ---- datasets for train / eval -------------------------------------------

struct LabeledSet {
  std::vector<std::string> class_names;
  std::vector<pcc::TrainSample> samples;
};

LabeledSet load_directory(const std::string& dir, std::size_t points, std::uint64_t seed,
                          const std::vector<std::string>* fixed_classes) {
  const auto sources = pcc::discover_inputs(dir);
  LabeledSet set;
  if (fixed_classes) {
    set.class_names = *fixed_classes;
  } else {
    for (const auto& s : sources) set.class_names.push_back(s.class_name);
    std::sort(set.class_names.begin(), set.class_names.end());
    set.class_names.erase(std::unique(set.class_names.begin(), set.class_names.end()), set.class_names.end());
  }
  for (const auto& s : sources) {
    const auto it = std::find(set.class_names.begin(), set.class_names.end(), s.class_name);
    if (it == set.class_names.end()) throw pcc::InvalidArgument("unknown class '" + s.class_name + "' in " + dir);
    set.samples.push_back({pcc::prepare_sample(s, points, seed).cloud,
                           static_cast<std::size_t>(it - set.class_names.begin())});
  }
  return set;
}

LabeledSet load_manifest_clean(const std::string& manifest_path) {
  const pcc::DatasetManifest m = pcc::load_manifest(manifest_path);
  const fs::path root = fs::path(manifest_path).parent_path();
  LabeledSet set{m.class_names, {}};
  for (const auto& s : m.samples) set.samples.push_back({pcc::load_cloud(root / s.clean), *m.label_of(s.class_name)});
  return set;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string data, manifest, validation, output;
  int epochs = 50;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  double smoothing = 0.2;
  std::string augmentation = "none";
  double lambda = 0.5;
  bool no_translate_scale = false;
  std::size_t train_points = 0;
  std::size_t points = 1024;
  std::uint64_t seed = 0;
};

int run_train(const TrainArgs& a) {
  if (a.data.empty() == a.manifest.empty()) throw UsageError("train needs exactly one of --data or --manifest");
  if (!(a.lr > 0.0)) throw UsageError("--lr must be positive");
  const auto aug = pcc::parse_augmentation(a.augmentation);
  if (!aug) throw UsageError("unknown augmentation '" + a.augmentation + "'");
  const LabeledSet train_set = a.data.empty() ? load_manifest_clean(a.manifest) : load_directory(a.data, a.points, a.seed, nullptr);
  LabeledSet val;
  if (!a.validation.empty()) val = load_directory(a.validation, a.points, a.seed, &train_set.class_names);

  pcc::TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch_size;
  cfg.adam.lr = a.lr;
  cfg.smoothing = a.smoothing;
  cfg.augmentation = *aug;
  cfg.mix_lambda = a.lambda;
  cfg.translate_scale = !a.no_translate_scale;
  cfg.train_points = a.train_points;
  cfg.seed = a.seed;
  const json cfg_json = {{"epochs", cfg.epochs},          {"batch_size", cfg.batch_size},
                         {"lr", cfg.adam.lr},             {"smoothing", cfg.smoothing},
                         {"augmentation", a.augmentation}, {"lambda", cfg.mix_lambda},
                         {"translate_scale", cfg.translate_scale}, {"train_points", cfg.train_points},
                         {"seed", cfg.seed}};

  pcc::Architecture arch;
  arch.classes = static_cast<int>(train_set.class_names.size());
  if (arch.classes < 2) throw pcc::InvalidArgument("training needs at least 2 classes");
  const pcc::TrainResult r = pcc::train(pcc::init_network(arch, a.seed), train_set.samples, val.samples, cfg);
  for (const pcc::EpochStats& e : r.history) {
    log_event("info", "epoch",
              {{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}, {"val_accuracy", e.val_accuracy}, {"lr", e.lr}});
  }
  pcc::save_checkpoint(a.output, r.state, {arch, train_set.class_names, pcc::sha256_hex(cfg_json.dump())});
  std::cout << "trained on " << train_set.samples.size() << " samples, best epoch " << r.best_epoch << ", checkpoint "
            << a.output << "\n";
  return kOk;
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint, manifest, output, adapt = "none";
  std::size_t adapt_batch = 32;
  double tent_lr = 1e-3;
  int tent_steps = 1;
  bool no_clean = false;
};

struct Cell {
  std::optional<pcc::CorruptionKind> kind;
  int severity = 0;
  std::vector<std::pair<std::string, std::string>> items;  // sample id, cloud path
};

int run_eval(const EvalArgs& a) {
  if (a.adapt != "none" && a.adapt != "bn" && a.adapt != "tent") throw UsageError("--adapt must be none, bn or tent");
  const pcc::LoadedCheckpoint ckpt = pcc::load_checkpoint(a.checkpoint);
  const pcc::DatasetManifest m = pcc::load_manifest(a.manifest);
  if (m.class_names != ckpt.meta.class_names) {
    throw pcc::InvalidArgument("manifest class names do not match the checkpoint's");
  }
  const fs::path root = fs::path(a.manifest).parent_path();
  std::map<std::string, std::size_t> labels;
  for (const auto& s : m.samples) labels[s.id] = *m.label_of(s.class_name);

  std::vector<Cell> cells;
  if (!a.no_clean) {
    Cell c;
    for (const auto& s : m.samples) c.items.emplace_back(s.id, s.clean);
    cells.push_back(std::move(c));
  }
  for (pcc::CorruptionKind k : m.kinds) {
    for (int sev : m.levels_for(k)) {
      Cell c{k, sev, {}};
      for (const auto& s : m.samples)
        for (const auto& e : s.corrupted)
          if (e.kind == k && e.severity == sev) c.items.emplace_back(s.id, e.cloud);
      cells.push_back(std::move(c));
    }
  }

  std::vector<pcc::PredictionRecord> records;
  const std::size_t batch = std::max<std::size_t>(2, a.adapt_batch);
  for (const Cell& cell : cells) {
    std::vector<pcc::PointCloud> clouds;
    for (const auto& [id, path] : cell.items) clouds.push_back(pcc::load_cloud(root / path));
    std::vector<std::size_t> pred;
    for (std::size_t start = 0; start < clouds.size();) {
      std::size_t count = std::min(batch, clouds.size() - start);
      if (clouds.size() - start - count == 1) ++count;  // fold a trailing singleton into this batch
      const std::span<const pcc::PointCloud> chunk(clouds.data() + start, count);
      pcc::NetworkState state = ckpt.state;
      if (a.adapt != "none" && count >= 2) {
        state = a.adapt == "bn" ? pcc::bn_adapt(ckpt.state, chunk)
                                : pcc::tent_adapt(ckpt.state, chunk, {a.tent_lr, a.tent_steps});
      }
      const auto p = pcc::predict(state, chunk);
      pred.insert(pred.end(), p.begin(), p.end());
      start += count;
    }
    for (std::size_t i = 0; i < cell.items.size(); ++i) {
      records.push_back({cell.items[i].first, cell.kind, cell.severity, labels.at(cell.items[i].first), pred[i], {}});
    }
  }
  pcc::write_file(a.output, pcc::encode_predictions(records));
  const pcc::MetricsReport rep = pcc::aggregate(records, m.class_names.size());
  std::printf("evaluated %zu clouds (adapt=%s): ER_clean %s, ER_cor %s\n", records.size(), a.adapt.c_str(),
              rep.clean.present ? std::to_string(rep.clean.er).c_str() : "n/a",
              rep.cor_present ? std::to_string(rep.er_cor).c_str() : "n/a");
  return kOk;
}

// ---- attack ---------------------------------------------------------------

struct AttackArgs {
  std::string checkpoint, input, output, label, manifest;
  double epsilon = 0.05;
  double step = 0.01;
  int steps = 7;
  std::uint64_t seed = 0;
};

std::size_t resolve_label(const std::string& label, const std::vector<std::string>& names) {
  const auto it = std::find(names.begin(), names.end(), label);
  if (it != names.end()) return static_cast<std::size_t>(it - names.begin());
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(label, &used);
    if (used == label.size() && v < names.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError("label '" + label + "' is neither a class name nor a valid index");
}

int run_attack(const AttackArgs& a) {
  if (a.input.empty() == a.manifest.empty()) throw UsageError("attack needs exactly one of --input or --manifest");
  const pcc::LoadedCheckpoint ckpt = pcc::load_checkpoint(a.checkpoint);
  pcc::PgdConfig cfg;
  cfg.epsilon = a.epsilon;
  cfg.step = a.step;
  cfg.steps = a.steps;
  cfg.seed = a.seed;
  if (!a.input.empty()) {
    if (a.label.empty() || a.output.empty()) throw UsageError("--input mode needs --label and --output");
    const std::size_t label = resolve_label(a.label, ckpt.meta.class_names);
    const pcc::PointCloud cloud = pcc::load_cloud(a.input);
    pcc::PgdTrace trace;
    const pcc::PointCloud adv = pcc::pgd_attack(ckpt.state, cloud, label, cfg, &trace);
    pcc::save_cloud(a.output, adv);
    const auto pred = pcc::predict(ckpt.state, std::span<const pcc::PointCloud>(&adv, 1));
    std::printf("loss %.6f -> %.6f, prediction %s (label %s)\n", trace.start_loss, trace.final_loss,
                ckpt.meta.class_names[pred[0]].c_str(), ckpt.meta.class_names[label].c_str());
    return kOk;
  }
  const pcc::DatasetManifest m = pcc::load_manifest(a.manifest);
  if (m.class_names != ckpt.meta.class_names) throw pcc::InvalidArgument("manifest class names do not match the checkpoint's");
  const fs::path root = fs::path(a.manifest).parent_path();
  std::size_t clean_wrong = 0, adv_wrong = 0;
  for (const auto& s : m.samples) {
    const std::size_t label = *m.label_of(s.class_name);
    const pcc::PointCloud cloud = pcc::load_cloud(root / s.clean);
    pcc::PgdConfig c = cfg;
    c.seed = pcc::mix_keys({a.seed, pcc::fnv1a64(s.id)});
    const pcc::PointCloud adv = pcc::pgd_attack(ckpt.state, cloud, label, c);
    clean_wrong += pcc::predict(ckpt.state, std::span<const pcc::PointCloud>(&cloud, 1))[0] != label;
    adv_wrong += pcc::predict(ckpt.state, std::span<const pcc::PointCloud>(&adv, 1))[0] != label;
  }
  const double n = static_cast<double>(m.samples.size());
  std::printf("samples %zu: clean ER %.4f, adversarial ER %.4f\n", m.samples.size(), clean_wrong / n, adv_wrong / n);
  return kOk;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
  std::string predictions, manifest, report, format;
};

int run_bench(const BenchArgs& a) {
  std::string format = a.format;
  if (format.empty()) format = fs::path(a.report).extension() == ".md" ? "markdown" : "json";
  if (format != "json" && format != "markdown") throw UsageError("--format must be json or markdown");
  const pcc::BenchmarkResult r = pcc::run_benchmark(
      a.predictions, a.manifest, a.report, format == "json" ? pcc::ReportFormat::kJson : pcc::ReportFormat::kMarkdown);
  if (!r.missing_cells.empty()) {
    log_event("warning", "missing_cells", {{"cells", r.missing_cells}});
  }
  std::printf("ER_clean %s, ER_cor %s over %d corruptions, %zu missing cells; report %s\n",
              r.report.clean.present ? std::to_string(r.report.clean.er).c_str() : "n/a",
              r.report.cor_present ? std::to_string(r.report.er_cor).c_str() : "n/a", r.report.kinds_present,
              r.missing_cells.size(), a.report.c_str());
  return kOk;
}

// ---- export / synth -------------------------------------------------------

struct ExportArgs {
  std::string input, output;
  bool ascii = false;
  bool normalize = false;
  std::size_t points = 1024;
  std::uint64_t seed = 0;
};

int run_export(const ExportArgs& a) {
  const pcc::SourceFile src = source_for(a.input);
  std::string out_ext = fs::path(a.output).extension().string();
  if (out_ext == ".off") {
    if (!src.is_mesh) throw UsageError("OFF output needs a mesh input");
    pcc::TriangleMesh mesh = pcc::load_mesh(src.path);
    pcc::write_file(a.output, pcc::write_off(mesh));
  } else {
    pcc::PointCloud cloud = src.is_mesh ? pcc::sample_surface(pcc::load_mesh(src.path), a.points, a.seed)
                                        : pcc::load_cloud(src.path);
    if (a.normalize) cloud = pcc::normalize_unit_sphere(cloud);
    pcc::save_cloud(a.output, cloud, a.ascii ? pcc::PlyEncoding::kAscii : pcc::PlyEncoding::kBinaryLittleEndian);
  }
  std::cout << "exported " << a.input << " -> " << a.output << "\n";
  return kOk;
}

struct SynthArgs {
  std::string output;
  std::size_t per_class = 10;
  std::uint64_t seed = 0;
  int sphere_subdivisions = 2;
  double anisotropy = 0.15;
};

int run_synth(const SynthArgs& a) {
  pcc::ShapeOptions opts;
  opts.sphere_subdivisions = a.sphere_subdivisions;
  opts.anisotropy = a.anisotropy;
  const auto shapes = pcc::make_shape_dataset(a.per_class, a.seed, opts);
  for (const auto& s : shapes) {
    const fs::path p = fs::path(a.output) / pcc::shape_name(s.shape) / (s.id + ".off");
    fs::create_directories(p.parent_path());
    pcc::write_file(p, pcc::write_off(s.mesh));
  }
  std::cout << "wrote " << shapes.size() << " meshes to " << a.output << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pccorrupt: point cloud corruption benchmark toolkit"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file; command-line flags take precedence");

  std::uint64_t seed = 0;
  try {
    seed = env_seed();
  } catch (const UsageError& e) {
    log_event("error", "usage", {{"message", e.what()}});
    return kUsage;
  }

  GenArgs gen;
  gen.seed = seed;
  auto* g = app.add_subcommand("gen", "Generate a corrupted dataset from a directory of meshes or clouds");
  g->add_option("--input", gen.input, "Input directory")->required();
  g->add_option("--output", gen.output, "Output dataset root")->required();
  g->add_option("--kinds", gen.kinds, "Corruptions (comma list or 'all')")->delimiter(',')->capture_default_str();
  g->add_option("--severities", gen.severities, "Severities 1-5")->delimiter(',')->capture_default_str();
  g->add_option("--views", gen.views, "View indices 1-5 for occlusion and lidar (default: --severities)")
      ->delimiter(',');
  g->add_option("--points", gen.points, "Points sampled per mesh")->capture_default_str();
  g->add_option("--seed", gen.seed, "Global seed (default PC_CORRUPT_SEED or 0)")->capture_default_str();
  g->add_option("--workers", gen.workers, "Worker threads")->capture_default_str();
  g->add_option("--severity-table", gen.severity_table, "Severity table JSON override");
  gen.occ.add(g);

  ApplyArgs apply;
  apply.seed = seed;
  auto* ap = app.add_subcommand("apply", "Apply one corruption to one file");
  ap->add_option("--input", apply.input, "Input .off/.ply/.bin/.raw")->required();
  ap->add_option("--output", apply.output, "Output .ply/.bin")->required();
  ap->add_option("--kind", apply.kind, "Corruption name")->required();
  ap->add_option("--severity", apply.severity, "Severity 1-5")->capture_default_str();
  ap->add_option("--seed", apply.seed, "Seed")->capture_default_str();
  ap->add_option("--points", apply.points, "Points sampled from a mesh")->capture_default_str();
  ap->add_option("--sample-key", apply.sample_key, "Sample id used to key the random stream (default: file stem)");
  ap->add_option("--severity-table", apply.severity_table, "Severity table JSON override");
  ap->add_option("--provenance", apply.provenance, "Write the provenance JSON here");
  ap->add_flag("--ascii", apply.ascii, "Write ASCII PLY");
  ap->add_flag("--no-normalize", apply.no_normalize, "Skip unit-sphere normalization");
  apply.occ.add(ap);

  TrainArgs train;
  train.seed = seed;
  auto* tr = app.add_subcommand("train", "Train the tiny classifier");
  tr->add_option("--data", train.data, "Directory of class subdirectories with meshes or clouds");
  tr->add_option("--manifest", train.manifest, "Use the clean clouds of a generated dataset");
  tr->add_option("--validation", train.validation, "Validation directory (same classes)");
  tr->add_option("--output", train.output, "Checkpoint path")->required();
  tr->add_option("--epochs", train.epochs)->capture_default_str();
  tr->add_option("--batch-size", train.batch_size)->capture_default_str();
  tr->add_option("--lr", train.lr)->capture_default_str();
  tr->add_option("--smoothing", train.smoothing)->capture_default_str();
  tr->add_option("--augmentation", train.augmentation, "none, cutmix_r, cutmix_k, mixup or rsmix")->capture_default_str();
  tr->add_option("--lambda", train.lambda, "Mixing ratio")->capture_default_str();
  tr->add_flag("--no-translate-scale", train.no_translate_scale, "Disable random translation and scaling");
  tr->add_option("--train-points", train.train_points, "Random points per cloud per step (0 = all)")->capture_default_str();
  tr->add_option("--points", train.points, "Points sampled per mesh")->capture_default_str();
  tr->add_option("--seed", train.seed)->capture_default_str();

  EvalArgs eval;
  auto* ev = app.add_subcommand("eval", "Predict every cloud of a generated dataset");
  ev->add_option("--checkpoint", eval.checkpoint)->required();
  ev->add_option("--manifest", eval.manifest)->required();
  ev->add_option("--output", eval.output, "Prediction CSV")->required();
  ev->add_option("--adapt", eval.adapt, "none, bn or tent")->capture_default_str();
  ev->add_option("--adapt-batch", eval.adapt_batch, "Adaptation batch size")->capture_default_str();
  ev->add_option("--tent-lr", eval.tent_lr)->capture_default_str();
  ev->add_option("--tent-steps", eval.tent_steps)->capture_default_str();
  ev->add_flag("--no-clean", eval.no_clean, "Skip the clean clouds");

  AttackArgs attack;
  attack.seed = seed;
  auto* at = app.add_subcommand("attack", "PGD point-shifting attack");
  at->add_option("--checkpoint", attack.checkpoint)->required();
  at->add_option("--input", attack.input, "Cloud to attack");
  at->add_option("--label", attack.label, "True class name or index");
  at->add_option("--output", attack.output, "Adversarial cloud path");
  at->add_option("--manifest", attack.manifest, "Attack every clean cloud and report error rates");
  at->add_option("--epsilon", attack.epsilon)->capture_default_str();
  at->add_option("--step", attack.step)->capture_default_str();
  at->add_option("--steps", attack.steps)->capture_default_str();
  at->add_option("--seed", attack.seed)->capture_default_str();

  BenchArgs bench;
  auto* be = app.add_subcommand("bench", "Compute the benchmark report from predictions");
  be->add_option("--predictions", bench.predictions)->required();
  be->add_option("--manifest", bench.manifest)->required();
  be->add_option("--report", bench.report)->required();
  be->add_option("--format", bench.format, "json or markdown (default from extension)");

  ExportArgs exp;
  exp.seed = seed;
  auto* ex = app.add_subcommand("export", "Convert between mesh and cloud formats");
  ex->add_option("--input", exp.input)->required();
  ex->add_option("--output", exp.output)->required();
  ex->add_flag("--ascii", exp.ascii, "Write ASCII PLY");
  ex->add_flag("--normalize", exp.normalize, "Normalize to the unit sphere");
  ex->add_option("--points", exp.points, "Points sampled from a mesh")->capture_default_str();
  ex->add_option("--seed", exp.seed)->capture_default_str();

  SynthArgs synth;
  synth.seed = seed;
  auto* sy = app.add_subcommand("synth", "Write a synthetic sphere/cube/pyramid/cylinder mesh dataset");
  sy->add_option("--output", synth.output)->required();
  sy->add_option("--per-class", synth.per_class)->capture_default_str();
  sy->add_option("--seed", synth.seed)->capture_default_str();
  sy->add_option("--sphere-subdivisions", synth.sphere_subdivisions)->capture_default_str();
  sy->add_option("--anisotropy", synth.anisotropy)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kUsage;
  }

  try {
    if (g->parsed()) return run_gen(gen);
    if (ap->parsed()) return run_apply(apply);
    if (tr->parsed()) return run_train(train);
    if (ev->parsed()) return run_eval(eval);
    if (at->parsed()) return run_attack(attack);
    if (be->parsed()) return run_bench(bench);
    if (ex->parsed()) return run_export(exp);
    if (sy->parsed()) return run_synth(synth);
  } catch (const UsageError& e) {
    log_event("error", "usage", {{"message", e.what()}});
    return kUsage;
  } catch (const std::exception& e) {
    log_event("error", "failed", {{"message", e.what()}});
    return kDataError;
  }
  return kUsage;
}
