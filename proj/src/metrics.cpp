// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcc/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>
#include <tuple>

#include "pcc/errors.hpp"
#include "pcc/mesh_io.hpp"

namespace pcc {

void validate_record(const PredictionRecord& r, std::optional<std::size_t> classes) {
  if (r.clean()) {
    if (r.severity != 0) throw InvalidArgument("clean record must have severity 0");
  } else if (r.severity < 1 || r.severity > kSeverityLevels) {
    throw InvalidArgument("severity " + std::to_string(r.severity) + " invalid for corruption " +
                          std::string(canonical_name(*r.corruption)) + " (expected 1-5; 0 is reserved for clean)");
  }
  if (classes && (r.true_label >= *classes || r.pred_label >= *classes)) {
    throw InvalidArgument("class index out of range for " + std::to_string(*classes) + " classes");
  }
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view s, std::size_t line, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError(ParseErrorKind::kInvalidValue, line, std::string("invalid ") + what + " '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

std::vector<PredictionRecord> parse_predictions(std::string_view text, std::optional<std::size_t> classes) {
  std::vector<PredictionRecord> out;
  std::set<std::tuple<std::string, int, int>> seen;
  std::size_t line_no = 0;
  bool header = false;
  bool has_logits = false;
  for (std::string_view rest = text; !rest.empty();) {
    const std::size_t nl = rest.find('\n');
    std::string_view line = trim(rest.substr(0, nl));
    rest = nl == std::string_view::npos ? std::string_view() : rest.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (!header) {
      if (line == kPredictionHeader) {
        header = true;
      } else if (line == std::string(kPredictionHeader) + ",logits") {
        header = has_logits = true;
      } else {
        throw ParseError(ParseErrorKind::kMalformedHeader, line_no,
                         "expected header '" + std::string(kPredictionHeader) + "'");
      }
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != (has_logits ? 6u : 5u)) {
      throw ParseError(ParseErrorKind::kInvalidValue, line_no,
                       "expected " + std::to_string(has_logits ? 6 : 5) + " fields, got " + std::to_string(fields.size()));
    }
    PredictionRecord r;
    r.sample_id = std::string(trim(fields[0]));
    if (r.sample_id.empty()) throw ParseError(ParseErrorKind::kInvalidValue, line_no, "empty sample id");
    const std::string_view kind = trim(fields[1]);
    if (kind != kCleanName) {
      r.corruption = parse_corruption(kind);
      if (!r.corruption) {
        throw ParseError(ParseErrorKind::kInvalidValue, line_no, "unknown corruption '" + std::string(kind) + "'");
      }
    }
    r.severity = parse_number<int>(trim(fields[2]), line_no, "severity");
    r.true_label = parse_number<std::size_t>(trim(fields[3]), line_no, "true_label");
    r.pred_label = parse_number<std::size_t>(trim(fields[4]), line_no, "pred_label");
    if (has_logits && !trim(fields[5]).empty()) {
      for (std::string_view v : split(trim(fields[5]), ';')) r.logits.push_back(parse_number<double>(trim(v), line_no, "logit"));
    }
    try {
      validate_record(r, classes);
    } catch (const InvalidArgument& e) {
      throw ParseError(ParseErrorKind::kInvalidValue, line_no, e.what());
    }
    const int kind_key = r.corruption ? static_cast<int>(ordinal(*r.corruption)) : -1;
    if (!seen.emplace(r.sample_id, kind_key, r.severity).second) {
      throw ParseError(ParseErrorKind::kDuplicateKey, line_no,
                       "duplicate row for sample '" + r.sample_id + "' " + std::string(kind) + " severity " +
                           std::to_string(r.severity));
    }
    out.push_back(std::move(r));
  }
  if (!header) throw ParseError(ParseErrorKind::kMalformedHeader, 1, "missing header");
  return out;
}

std::vector<PredictionRecord> ingest_predictions(const std::filesystem::path& path, std::optional<std::size_t> classes) {
  return parse_predictions(read_file(path), classes);
}

std::string encode_predictions(std::span<const PredictionRecord> records) {
  const bool logits = std::any_of(records.begin(), records.end(), [](const auto& r) { return !r.logits.empty(); });
  std::string out(kPredictionHeader);
  if (logits) out += ",logits";
  out += '\n';
  for (const PredictionRecord& r : records) {
    out += r.sample_id;
    out += ',';
    out += r.corruption ? canonical_name(*r.corruption) : kCleanName;
    out += ',' + std::to_string(r.severity) + ',' + std::to_string(r.true_label) + ',' + std::to_string(r.pred_label);
    if (logits) {
      out += ',';
      for (std::size_t i = 0; i < r.logits.size(); ++i) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof(buf), r.logits[i]);
        if (i) out += ';';
        out.append(buf, res.ptr);
      }
    }
    out += '\n';
  }
  return out;
}

double error_rate(std::span<const PredictionRecord> records) {
  if (records.empty()) throw InvalidArgument("error rate of an empty cell");
  std::uint64_t wrong = 0;
  for (const auto& r : records) wrong += r.correct() ? 0 : 1;
  return static_cast<double>(wrong) / static_cast<double>(records.size());
}

namespace {

double class_mean(std::span<const std::uint64_t> matrix, std::size_t classes) {
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t i = 0; i < classes; ++i) {
    std::uint64_t row = 0;
    for (std::size_t j = 0; j < classes; ++j) row += matrix[i * classes + j];
    if (row == 0) continue;
    sum += static_cast<double>(row - matrix[i * classes + i]) / static_cast<double>(row);
    ++present;
  }
  return present == 0 ? 0.0 : sum / static_cast<double>(present);
}

std::size_t infer_classes(std::span<const PredictionRecord> records) {
  std::size_t c = 0;
  for (const auto& r : records) c = std::max({c, r.true_label + 1, r.pred_label + 1});
  return c;
}

}  // namespace

double class_mean_error_rate(std::span<const PredictionRecord> records) {
  if (records.empty()) throw InvalidArgument("class-mean error rate of no records");
  const std::size_t c = infer_classes(records);
  std::vector<std::uint64_t> m(c * c, 0);
  for (const auto& r : records) ++m[r.true_label * c + r.pred_label];
  return class_mean(m, c);
}

bool Scope::matches(const PredictionRecord& r) const {
  if (subset == Subset::kClean && !r.clean()) return false;
  if (subset == Subset::kCorrupted && r.clean()) return false;
  if (corruption && r.corruption != corruption) return false;
  if (severity && r.severity != *severity) return false;
  return true;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts)
    for (std::uint64_t v : row) t += v;
  return t;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
  return t;
}

ConfusionMatrix make_confusion(std::vector<std::vector<std::uint64_t>> counts) {
  ConfusionMatrix m;
  m.normalized.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::uint64_t row = 0;
    for (std::uint64_t v : counts[i]) row += v;
    m.normalized[i].resize(counts[i].size(), 0.0);
    if (row == 0) continue;
    for (std::size_t j = 0; j < counts[i].size(); ++j) {
      m.normalized[i][j] = static_cast<double>(counts[i][j]) / static_cast<double>(row);
    }
  }
  m.counts = std::move(counts);
  return m;
}

ConfusionMatrix confusion(std::span<const PredictionRecord> records, const Scope& scope, std::size_t classes) {
  std::vector<std::vector<std::uint64_t>> counts(classes, std::vector<std::uint64_t>(classes, 0));
  std::size_t matched = 0;
  for (const auto& r : records) {
    if (!scope.matches(r)) continue;
    validate_record(r, classes);
    ++counts[r.true_label][r.pred_label];
    ++matched;
  }
  if (matched == 0) throw InvalidArgument("confusion scope matches no records");
  return make_confusion(std::move(counts));
}

MetricsAccumulator::MetricsAccumulator(std::size_t classes)
    : classes_(classes), cells_(1 + kSeverityLevels * kCorruptionCount, std::vector<std::uint64_t>(classes * classes, 0)) {
  if (classes == 0) throw InvalidArgument("metrics need at least one class");
}

std::size_t MetricsAccumulator::slot(int severity, std::optional<CorruptionKind> kind) const {
  if (!kind) return 0;
  return 1 + static_cast<std::size_t>(severity - 1) * kCorruptionCount + ordinal(*kind);
}

const std::vector<std::uint64_t>& MetricsAccumulator::cell_counts(int severity, std::optional<CorruptionKind> kind) const {
  return cells_[slot(severity, kind)];
}

void MetricsAccumulator::add(const PredictionRecord& r) {
  validate_record(r, classes_);
  ++cells_[slot(r.severity, r.corruption)][r.true_label * classes_ + r.pred_label];
}

void MetricsAccumulator::add(std::span<const PredictionRecord> records) {
  for (const auto& r : records) add(r);
}

void MetricsAccumulator::merge(const MetricsAccumulator& other) {
  if (other.classes_ != classes_) throw InvalidArgument("cannot merge accumulators with different class counts");
  for (std::size_t s = 0; s < cells_.size(); ++s)
    for (std::size_t i = 0; i < cells_[s].size(); ++i) cells_[s][i] += other.cells_[s][i];
}

namespace {

CellStats cell_stats(const std::vector<std::uint64_t>& m, std::size_t classes) {
  CellStats c;
  for (std::size_t i = 0; i < classes; ++i) {
    for (std::size_t j = 0; j < classes; ++j) {
      c.total += m[i * classes + j];
      if (i != j) c.wrong += m[i * classes + j];
    }
  }
  c.present = c.total > 0;
  if (c.present) {
    c.er = static_cast<double>(c.wrong) / static_cast<double>(c.total);
    c.mer = class_mean(m, classes);
  }
  return c;
}

std::vector<std::vector<std::uint64_t>> unflatten(const std::vector<std::uint64_t>& m, std::size_t classes) {
  std::vector<std::vector<std::uint64_t>> out(classes);
  for (std::size_t i = 0; i < classes; ++i) out[i].assign(m.begin() + i * classes, m.begin() + (i + 1) * classes);
  return out;
}

}  // namespace

MetricsReport MetricsAccumulator::report() const {
  MetricsReport rep;
  rep.classes = classes_;
  rep.clean = cell_stats(cells_[0], classes_);
  std::vector<std::uint64_t> corrupted(classes_ * classes_, 0);
  for (std::size_t k = 0; k < kCorruptionCount; ++k) {
    KindStats& ks = rep.kinds[k];
    for (int s = 1; s <= kSeverityLevels; ++s) {
      const auto& m = cells_[slot(s, kAllCorruptions[k])];
      for (std::size_t i = 0; i < m.size(); ++i) corrupted[i] += m[i];
      CellStats c = cell_stats(m, classes_);
      if (c.present) {
        ++ks.severities_present;
        ks.sum_er += c.er;
        ks.sum_mer += c.mer;
      }
      rep.cells[static_cast<std::size_t>(s - 1)][k] = c;
    }
    ks.present = ks.severities_present > 0;
    if (ks.present) {
      ks.er = ks.sum_er / ks.severities_present;
      ks.mer = ks.sum_mer / ks.severities_present;
      ++rep.kinds_present;
      rep.sum_er_cor += ks.er;
      rep.sum_mer_cor += ks.mer;
    }
  }
  rep.cor_present = rep.kinds_present > 0;
  if (rep.cor_present) {
    rep.er_cor = rep.sum_er_cor / rep.kinds_present;
    rep.mer_cor = rep.sum_mer_cor / rep.kinds_present;
  }
  rep.confusion_clean = make_confusion(unflatten(cells_[0], classes_));
  rep.confusion_corrupted = make_confusion(unflatten(corrupted, classes_));
  return rep;
}

MetricsReport aggregate(std::span<const PredictionRecord> records, std::optional<std::size_t> classes) {
  if (records.empty()) throw InvalidArgument("aggregate needs at least one record");
  MetricsAccumulator acc(classes.value_or(infer_classes(records)));
  acc.add(records);
  return acc.report();
}

namespace {

nlohmann::json cell_json(const CellStats& c) {
  return {{"present", c.present}, {"total", c.total}, {"wrong", c.wrong}, {"er", c.er}, {"mer", c.mer}};
}

CellStats cell_from_json(const nlohmann::json& j) {
  CellStats c;
  c.present = j.at("present").get<bool>();
  c.total = j.at("total").get<std::uint64_t>();
  c.wrong = j.at("wrong").get<std::uint64_t>();
  c.er = j.at("er").get<double>();
  c.mer = j.at("mer").get<double>();
  return c;
}

}  // namespace

nlohmann::json report_to_json(const MetricsReport& r) {
  nlohmann::json doc;
  doc["report_version"] = kReportVersion;
  doc["classes"] = r.classes;
  doc["clean"] = cell_json(r.clean);
  nlohmann::json kinds = nlohmann::json::object();
  for (CorruptionKind kind : kAllCorruptions) {
    const KindStats& ks = r.kinds[ordinal(kind)];
    nlohmann::json cells = nlohmann::json::array();
    for (int s = 1; s <= kSeverityLevels; ++s) cells.push_back(cell_json(r.cell(s, kind)));
    kinds[std::string(canonical_name(kind))] = {{"present", ks.present},
                                                {"severities_present", ks.severities_present},
                                                {"er", ks.er},
                                                {"mer", ks.mer},
                                                {"sum_er", ks.sum_er},
                                                {"sum_mer", ks.sum_mer},
                                                {"severities", cells}};
  }
  doc["corruptions"] = kinds;
  doc["corrupted"] = {{"present", r.cor_present}, {"kinds_present", r.kinds_present}, {"er_cor", r.er_cor},
                      {"mer_cor", r.mer_cor},     {"sum_er_cor", r.sum_er_cor},     {"sum_mer_cor", r.sum_mer_cor}};
  doc["confusion"] = {{"clean", r.confusion_clean.counts}, {"corrupted", r.confusion_corrupted.counts}};
  return doc;
}

MetricsReport report_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("report_version").get<int>() != kReportVersion) {
      throw ParseError(ParseErrorKind::kMalformedHeader, 0, "unsupported report_version");
    }
    MetricsReport r;
    r.classes = doc.at("classes").get<std::size_t>();
    r.clean = cell_from_json(doc.at("clean"));
    for (CorruptionKind kind : kAllCorruptions) {
      const auto& k = doc.at("corruptions").at(std::string(canonical_name(kind)));
      KindStats& ks = r.kinds[ordinal(kind)];
      ks.present = k.at("present").get<bool>();
      ks.severities_present = k.at("severities_present").get<int>();
      ks.er = k.at("er").get<double>();
      ks.mer = k.at("mer").get<double>();
      ks.sum_er = k.at("sum_er").get<double>();
      ks.sum_mer = k.at("sum_mer").get<double>();
      const auto& cells = k.at("severities");
      if (cells.size() != kSeverityLevels) throw ParseError(ParseErrorKind::kInvalidValue, 0, "expected 5 severities");
      for (int s = 1; s <= kSeverityLevels; ++s) {
        r.cells[static_cast<std::size_t>(s - 1)][ordinal(kind)] = cell_from_json(cells[static_cast<std::size_t>(s - 1)]);
      }
    }
    const auto& c = doc.at("corrupted");
    r.cor_present = c.at("present").get<bool>();
    r.kinds_present = c.at("kinds_present").get<int>();
    r.er_cor = c.at("er_cor").get<double>();
    r.mer_cor = c.at("mer_cor").get<double>();
    r.sum_er_cor = c.at("sum_er_cor").get<double>();
    r.sum_mer_cor = c.at("sum_mer_cor").get<double>();
    r.confusion_clean = make_confusion(doc.at("confusion").at("clean").get<std::vector<std::vector<std::uint64_t>>>());
    r.confusion_corrupted =
        make_confusion(doc.at("confusion").at("corrupted").get<std::vector<std::vector<std::uint64_t>>>());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseErrorKind::kInvalidValue, 0, std::string("report: ") + e.what());
  }
}

std::string_view display_name(CorruptionKind kind) {
  static constexpr std::array<std::string_view, kCorruptionCount> kNames = {
      "Occlusion", "LiDAR",     "Density Inc.", "Density Dec.", "Cutout", "Uniform", "Gaussian", "Impulse",
      "Upsampling", "Background", "Rotation",     "Shear",        "FFD",    "RBF",     "Inv. RBF"};
  return kNames[ordinal(kind)];
}

namespace {

std::string percent(bool present, double rate) {
  if (!present) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * rate);
  return buf;
}

std::string_view group_name(CorruptionGroup g) {
  switch (g) {
    case CorruptionGroup::kDensity: return "Density";
    case CorruptionGroup::kNoise: return "Noise";
    case CorruptionGroup::kTransformation: return "Transformation";
  }
  return "";
}

std::string render_markdown(const MetricsReport& r) {
  std::string out = "Error rates (%), columns grouped as Density / Noise / Transformation corruptions.\n\n";
  out += "| Metric | Clean | ER_cor |";
  for (CorruptionKind k : kAllCorruptions) out += " " + std::string(display_name(k)) + " |";
  out += "\n|---|---|---|";
  for (std::size_t i = 0; i < kCorruptionCount; ++i) out += "---|";
  out += "\n| Group | | |";
  for (CorruptionKind k : kAllCorruptions) out += " " + std::string(group_name(group_of(k))) + " |";
  auto row = [&](std::string_view label, const CellStats& clean, bool cor_present, double cor, auto&& value_of) {
    out += "\n| " + std::string(label) + " | " + percent(clean.present, value_of(clean)) + " | " +
           percent(cor_present, cor) + " |";
  };
  row("ER", r.clean, r.cor_present, r.er_cor, [](const CellStats& c) { return c.er; });
  for (const KindStats& ks : r.kinds) out += " " + percent(ks.present, ks.er) + " |";
  row("mER", r.clean, r.cor_present, r.mer_cor, [](const CellStats& c) { return c.mer; });
  for (const KindStats& ks : r.kinds) out += " " + percent(ks.present, ks.mer) + " |";
  for (int s = 1; s <= kSeverityLevels; ++s) {
    out += "\n| ER s=" + std::to_string(s) + " | | |";
    for (CorruptionKind k : kAllCorruptions) out += " " + percent(r.cell(s, k).present, r.cell(s, k).er) + " |";
  }
  out += "\n";
  return out;
}

}  // namespace

std::string render_report(const MetricsReport& report, ReportFormat format) {
  if (format == ReportFormat::kJson) return report_to_json(report).dump(2) + "\n";
  return render_markdown(report);
}

}  // namespace pcc
