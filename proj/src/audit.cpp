#include "fairaudit/audit.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <map>
#include <tuple>
#include <unordered_map>

#include "fairaudit/calibration.hpp"
#include "fairaudit/errors.hpp"
#include "fairaudit/similarity.hpp"
#include "fairaudit/suite.hpp"

namespace fairaudit {

namespace {

ContingencyTable2x2 labelled(ContingencyTable2x2 t, const char* col) {
  t.row_label = "original";
  t.col_label = col;
  return t;
}

GroupTables causal_tables(const Dataset& dataset, const CvResult& cv) {
  std::vector<std::pair<int, int>> pairs[2];
  for (const auto& c : counterfactual_flip(dataset, cv)) {
    pairs[static_cast<int>(c.group)].emplace_back(c.original, c.flipped);
  }
  return {labelled(build_contingency(pairs[0]), "counterfactual"),
          labelled(build_contingency(pairs[1]), "counterfactual")};
}

GroupTables awareness_tables(const Dataset& dataset,
                             std::span<const PredictionRecord> records) {
  std::unordered_map<RowId, int> prediction;
  for (const auto& r : records) prediction[r.row_id] = r.y_pred;
  auto predicted = [&](RowId id) {
    auto it = prediction.find(id);
    if (it == prediction.end()) {
      throw InputError("row_id " + std::to_string(id) + " has no prediction");
    }
    return it->second;
  };

  const Eigen::MatrixXd inv_cov = covariance_inverse(dataset.features());
  auto table = [&](MatchDirection direction) {
    std::vector<std::pair<int, int>> pairs;
    for (const auto& m : nearest_neighbor_match(dataset, inv_cov, direction)) {
      pairs.emplace_back(predicted(m.source), predicted(m.matched));
    }
    return labelled(build_contingency(pairs), "neighbor");
  };
  return {table(MatchDirection::protected_to_unprotected),
          table(MatchDirection::unprotected_to_protected)};
}

RunConfig echo(const AuditConfig& c, const char* source) {
  RunConfig r;
  r.k = c.k;
  r.alpha = c.alpha;
  r.bins = c.bins;
  r.seed = c.seed;
  r.threshold = c.threshold;
  r.include_group = c.include_group;
  r.stratified = c.stratified;
  r.learning_rate = c.params.learning_rate;
  r.iterations = c.params.iterations;
  r.l2 = c.params.l2;
  r.source = source;
  r.data_path = c.data_path.string();
  r.predictions_path = c.predictions_path.string();
  return r;
}

void check_config(const AuditConfig& c) {
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(c.threshold > 0.0 && c.threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  if (c.bins < 2) throw ConfigError("bins must be at least 2");
}

AuditReport assemble(std::span<const PredictionRecord> records, int k, const GroupLabels& labels,
                     const AuditConfig& config, AuditInputs inputs, RunConfig run) {
  inputs.distributions = collect_metric_distributions(records, k);
  inputs.calibration = bin_scores(records, config.bins);

  AuditReport report;
  report.timestamp = utc_timestamp();
  report.config = std::move(run);
  report.config.k = k;
  report.conventions = default_conventions();
  report.model_id = config.model_id;
  report.protected_label = labels.protected_label;
  report.unprotected_label = labels.unprotected_label;
  report.rows = records.size();
  report.mean_fold_accuracy = mean_fold_accuracy(records);
  report.verdicts = evaluate_all(inputs, config.alpha);
  report.samples = inputs.distributions->samples;
  report.calibration = inputs.calibration;
  for (const auto& v : report.verdicts) {
    if ((v.id == "calibration" || v.id == "well_calibration") && v.reason) {
      report.calibration_notes.push_back(v.id + ": " + *v.reason);
    }
  }
  report.causal_tables = inputs.causal;
  report.awareness_tables = inputs.awareness;
  return report;
}

}  // namespace

std::optional<double> mean_fold_accuracy(std::span<const PredictionRecord> records) {
  std::map<int, std::pair<long, long>> per_fold;
  for (const auto& r : records) {
    auto& [hits, total] = per_fold[r.fold_id];
    hits += r.y_pred == r.y_true ? 1 : 0;
    ++total;
  }
  if (per_fold.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& [fold, counts] : per_fold) {
    sum += static_cast<double>(counts.first) / static_cast<double>(counts.second);
  }
  return sum / static_cast<double>(per_fold.size());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

AuditReport audit_dataset(const Dataset& dataset, const GroupLabels& labels,
                          const AuditConfig& config) {
  check_config(config);
  if (dataset.count(Group::protected_group) == 0 || dataset.count(Group::unprotected_group) == 0) {
    throw EmptyGroupError("both groups need at least one row");
  }
  const FoldPlan plan = make_folds(dataset, config.k, config.seed, config.stratified);
  CvConfig cv_config;
  cv_config.params = config.params;
  cv_config.params.seed = config.seed;
  cv_config.threshold = config.threshold;
  cv_config.include_group = config.include_group;
  cv_config.workers = config.workers;
  const CvResult cv = run_cv(dataset, plan, cv_config);

  AuditInputs inputs;
  if (config.include_group) {
    inputs.causal = causal_tables(dataset, cv);
  } else {
    inputs.causal_unavailable =
        "the model was trained without the group feature (--exclude-race), so there is nothing "
        "to flip";
  }
  if (config.awareness) {
    inputs.awareness = awareness_tables(dataset, cv.records);
  } else {
    inputs.awareness_unavailable = "nearest-neighbor matching was disabled";
  }
  return assemble(cv.records, config.k, labels, config, std::move(inputs), echo(config, "data"));
}

AuditReport audit_predictions(std::vector<PredictionRecord> records, const GroupLabels& labels,
                              const Dataset* dataset, const AuditConfig& config) {
  check_config(config);
  if (records.empty()) throw InputError("the prediction file has no records");
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.fold_id, a.row_id) < std::tie(b.fold_id, b.row_id);
  });
  const int k = fold_count(records);

  AuditInputs inputs;
  inputs.causal_unavailable =
      "counterfactual predictions need the built-in model; external predictions cannot be "
      "re-scored";
  if (dataset != nullptr && config.awareness) {
    inputs.awareness = awareness_tables(*dataset, records);
  } else if (dataset == nullptr) {
    inputs.awareness_unavailable = "nearest-neighbor matching needs the feature data (--data)";
  } else {
    inputs.awareness_unavailable = "nearest-neighbor matching was disabled";
  }
  return assemble(records, k, labels, config, std::move(inputs), echo(config, "predictions"));
}

AuditReport run_audit(const AuditConfig& config) {
  const bool has_data = !config.data_path.empty();
  const bool has_predictions = !config.predictions_path.empty();
  if (!has_data && !has_predictions) throw ConfigError("give --data or --predictions");
  if (has_data && config.schema_path.empty()) throw ConfigError("--data needs --schema");

  std::optional<Schema> schema;
  if (!config.schema_path.empty()) schema = load_schema(config.schema_path);
  const GroupLabels labels = schema ? schema->groups : GroupLabels{};

  std::optional<LoadResult> loaded;
  if (has_data) loaded = load_dataset(config.data_path, *schema);

  AuditReport report;
  if (has_predictions) {
    auto records = load_external_predictions(config.predictions_path, labels);
    report = audit_predictions(std::move(records), labels, loaded ? &loaded->dataset : nullptr,
                               config);
  } else {
    report = audit_dataset(loaded->dataset, labels, config);
  }
  if (loaded) report.dropped_rows = loaded->dropped();
  return report;
}

}  // namespace fairaudit
