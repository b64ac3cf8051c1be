// Copyright 2026 The pccorrupt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcc/severity_table.hpp"

namespace pcc {

/// One classifier outcome. An empty `corruption` marks a clean record,
/// which carries severity 0.
struct PredictionRecord {
  std::string sample_id;
  std::optional<CorruptionKind> corruption;
  int severity = 0;
  std::size_t true_label = 0;
  std::size_t pred_label = 0;
  std::vector<double> logits;

  bool clean() const { return !corruption.has_value(); }
  bool correct() const { return true_label == pred_label; }
  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

inline constexpr std::string_view kPredictionHeader = "sample_id,corruption,severity,true_label,pred_label";
inline constexpr std::string_view kCleanName = "clean";

/// Throws InvalidArgument when the severity/corruption pairing or a class
/// index (against `classes`, if given) is invalid.
void validate_record(const PredictionRecord& record, std::optional<std::size_t> classes = std::nullopt);

/// Parses the prediction CSV. Errors are ParseError with the 1-based line.
std::vector<PredictionRecord> parse_predictions(std::string_view text, std::optional<std::size_t> classes = std::nullopt);
std::vector<PredictionRecord> ingest_predictions(const std::filesystem::path& path,
                                                 std::optional<std::size_t> classes = std::nullopt);
std::string encode_predictions(std::span<const PredictionRecord> records);

double error_rate(std::span<const PredictionRecord> records);
double class_mean_error_rate(std::span<const PredictionRecord> records);

struct Scope {
  enum class Subset { kAll, kClean, kCorrupted };
  Subset subset = Subset::kAll;
  std::optional<CorruptionKind> corruption;
  std::optional<int> severity;

  bool matches(const PredictionRecord& r) const;
};

struct ConfusionMatrix {
  std::vector<std::vector<std::uint64_t>> counts;
  std::vector<std::vector<double>> normalized;

  std::uint64_t total() const;
  std::uint64_t trace() const;
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix make_confusion(std::vector<std::vector<std::uint64_t>> counts);
/// Throws InvalidArgument if no record matches `scope`.
ConfusionMatrix confusion(std::span<const PredictionRecord> records, const Scope& scope, std::size_t classes);

struct CellStats {
  bool present = false;
  std::uint64_t total = 0;
  std::uint64_t wrong = 0;
  double er = 0.0;
  double mer = 0.0;
  friend bool operator==(const CellStats&, const CellStats&) = default;
};

struct KindStats {
  bool present = false;
  int severities_present = 0;
  double er = 0.0;   // mean over present severities
  double mer = 0.0;
  double sum_er = 0.0;
  double sum_mer = 0.0;
  friend bool operator==(const KindStats&, const KindStats&) = default;
};

struct MetricsReport {
  std::size_t classes = 0;
  CellStats clean;
  std::array<std::array<CellStats, kCorruptionCount>, kSeverityLevels> cells{};  // [severity - 1][kind]
  std::array<KindStats, kCorruptionCount> kinds{};
  bool cor_present = false;
  int kinds_present = 0;
  double er_cor = 0.0;
  double mer_cor = 0.0;
  double sum_er_cor = 0.0;
  double sum_mer_cor = 0.0;
  ConfusionMatrix confusion_clean;
  ConfusionMatrix confusion_corrupted;

  const CellStats& cell(int severity, CorruptionKind kind) const {
    return cells[static_cast<std::size_t>(severity - 1)][ordinal(kind)];
  }
  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Integer confusion counts per (scope cell); merging is exact.
class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(std::size_t classes);

  void add(const PredictionRecord& record);
  void add(std::span<const PredictionRecord> records);
  void merge(const MetricsAccumulator& other);
  MetricsReport report() const;

  std::size_t classes() const { return classes_; }
  /// Confusion counts of one cell; severity 0 selects the clean cell.
  const std::vector<std::uint64_t>& cell_counts(int severity, std::optional<CorruptionKind> kind) const;
  friend bool operator==(const MetricsAccumulator&, const MetricsAccumulator&) = default;

 private:
  std::size_t slot(int severity, std::optional<CorruptionKind> kind) const;

  std::size_t classes_;
  std::vector<std::vector<std::uint64_t>> cells_;  // flattened C x C per slot
};

/// Requires at least one record. `classes` defaults to 1 + the largest label.
MetricsReport aggregate(std::span<const PredictionRecord> records, std::optional<std::size_t> classes = std::nullopt);

enum class ReportFormat { kJson, kMarkdown };
inline constexpr int kReportVersion = 1;

nlohmann::json report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& doc);
std::string render_report(const MetricsReport& report, ReportFormat format);
std::string_view display_name(CorruptionKind kind);

}  // namespace pcc
