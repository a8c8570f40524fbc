#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fairaudit/cv.hpp"
#include "fairaudit/data.hpp"
#include "fairaudit/report.hpp"

namespace fairaudit {

struct AuditConfig {
  std::filesystem::path data_path;
  std::filesystem::path predictions_path;
  std::filesystem::path schema_path;
  int k = 250;
  double alpha = 0.05;
  int bins = 10;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  bool include_group = true;
  bool stratified = false;
  LogisticParams params;
  std::string model_id = "logistic_regression";
  unsigned workers = 0;
  // Run the Mahalanobis matching test; it is quadratic in the row count.
  bool awareness = true;
};

// Audits an in-memory dataset with the built-in cross-validated model.
AuditReport audit_dataset(const Dataset& dataset, const GroupLabels& labels,
                          const AuditConfig& config);

// Audits external predictions. `dataset`, when given, enables the
// nearest-neighbor test; its rows are joined to the records by row_id.
AuditReport audit_predictions(std::vector<PredictionRecord> records, const GroupLabels& labels,
                              const Dataset* dataset, const AuditConfig& config);

// Loads the inputs named in `config` and dispatches to one of the above.
// Requires a schema with --data; predictions alone may omit it.
AuditReport run_audit(const AuditConfig& config);

// Mean over folds of pooled per-fold accuracy; empty without any folds.
std::optional<double> mean_fold_accuracy(std::span<const PredictionRecord> records);

// UTC, second resolution, e.g. 2024-01-31T12:00:00Z.
std::string utc_timestamp();

}  // namespace fairaudit
