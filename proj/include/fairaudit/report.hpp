#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairaudit/calibration.hpp"
#include "fairaudit/cv.hpp"
#include "fairaudit/suite.hpp"

namespace fairaudit {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

struct RunConfig {
  int k = 250;
  double alpha = 0.05;
  int bins = 10;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  bool include_group = true;
  bool stratified = false;
  double learning_rate = 1.0;
  int iterations = 500;
  double l2 = 1e-4;
  // "data" when the built-in model was cross-validated, "predictions" when
  // an external prediction file was audited.
  std::string source = "data";
  std::string data_path;
  std::string predictions_path;

  bool operator==(const RunConfig&) const = default;
};

struct AuditReport {
  int schema_version = kReportSchemaVersion;
  std::string tool_version = kToolVersion;
  std::string timestamp;
  RunConfig config;
  // Sign, coding and df conventions the numbers depend on.
  std::map<std::string, std::string> conventions;
  std::string model_id;
  std::string protected_label;
  std::string unprotected_label;
  std::size_t rows = 0;
  std::size_t dropped_rows = 0;
  // Mean over folds of per-fold accuracy, both groups pooled.
  std::optional<double> mean_fold_accuracy;
  std::vector<MetricVerdict> verdicts;
  std::map<Statistic, StatisticSamples> samples;
  std::optional<CalibrationTable> calibration;
  std::vector<std::string> calibration_notes;
  std::optional<GroupTables> causal_tables;
  std::optional<GroupTables> awareness_tables;
};

// Conventions written into every report.
std::map<std::string, std::string> default_conventions();

std::string to_json_text(const AuditReport& report);

struct ParsedReport {
  AuditReport report;
  // Unknown fields and other non-fatal findings.
  std::vector<std::string> warnings;
};

// Throws ParseError on malformed JSON or a newer major schema version.
ParsedReport parse_report(const std::string& json_text);

void write_json(const AuditReport& report, const std::filesystem::path& path);
ParsedReport read_json(const std::filesystem::path& path);

enum class ReportFormat { json, md };

std::string render_report(const AuditReport& report, ReportFormat format);

// Display rule for p-values: "<1e-4" below 1e-4, otherwise four decimals.
std::string format_p_value(double p);

}  // namespace fairaudit
