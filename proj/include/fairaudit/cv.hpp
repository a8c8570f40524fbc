#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/data.hpp"
#include "fairaudit/model.hpp"

namespace fairaudit {

struct FoldPlan {
  int k = 0;
  std::uint64_t seed = 0;
  bool stratified = false;
  std::map<RowId, int> assignments;

  int fold_of(RowId id) const;
  std::vector<std::size_t> fold_sizes() const;
};

// Shuffles the rows (ordered by row_id first, so the plan does not depend on
// dataset row order) and cuts the permutation into k contiguous chunks; the
// first n % k folds get one extra row. With `stratified`, each outcome class
// is shuffled separately and rows are dealt round-robin.
FoldPlan make_folds(const Dataset& dataset, int k, std::uint64_t seed, bool stratified = false);

struct CvConfig {
  LogisticParams params;
  double threshold = 0.5;
  // Append the group indicator as the last model feature.
  bool include_group = true;
  unsigned workers = 0;
};

struct CvResult {
  // Ordered by fold, then row_id.
  std::vector<PredictionRecord> records;
  // models[f] was trained without fold f.
  std::vector<TrainedModel> models;
  bool include_group = true;
};

CvResult run_cv(const Dataset& dataset, const FoldPlan& plan, const CvConfig& config);

enum class Statistic {
  ppr,
  tpr,
  fpr,
  fnr,
  ppv,
  npv,
  accuracy,
  fn_fp_ratio,
  mean_score_favorable,
  mean_score_unfavorable,
};

inline constexpr std::array kAllStatistics = {
    Statistic::ppr,         Statistic::tpr,
    Statistic::fpr,         Statistic::fnr,
    Statistic::ppv,         Statistic::npv,
    Statistic::accuracy,    Statistic::fn_fp_ratio,
    Statistic::mean_score_favorable, Statistic::mean_score_unfavorable,
};

std::string_view to_string(Statistic s);
std::optional<Statistic> statistic_from_string(std::string_view name);

// Confusion counts with the favorable outcome as the positive class.
struct ConfusionCounts {
  long tp = 0;  // predicted favorable, truly favorable
  long fp = 0;  // predicted favorable, truly unfavorable
  long tn = 0;  // predicted unfavorable, truly unfavorable
  long fn = 0;  // predicted unfavorable, truly favorable

  long total() const { return tp + fp + tn + fn; }
};

struct GroupFoldStats {
  int fold_id = 0;
  Group group = Group::protected_group;
  ConfusionCounts counts;
  // Indexed by Statistic; empty when the denominator count is zero.
  std::array<std::optional<double>, kAllStatistics.size()> values;

  const std::optional<double>& value(Statistic s) const {
    return values[static_cast<std::size_t>(s)];
  }
};

struct FoldGroupPair {
  GroupFoldStats protected_stats;
  GroupFoldStats unprotected_stats;

  const GroupFoldStats& of(Group g) const {
    return g == Group::protected_group ? protected_stats : unprotected_stats;
  }
};

// Statistics for one fold's records, split by group. Throws InputError if
// the records do not share a fold_id.
FoldGroupPair grouped_confusion_stats(std::span<const PredictionRecord> fold_records);

struct StatisticSamples {
  std::vector<double> protected_sample;
  std::vector<double> unprotected_sample;
  std::vector<int> protected_folds;
  std::vector<int> unprotected_folds;
  // Set when either sample has fewer than two defined folds.
  std::optional<std::string> insufficient;

  const std::vector<double>& sample(Group g) const {
    return g == Group::protected_group ? protected_sample : unprotected_sample;
  }
};

struct MetricDistributions {
  int k = 0;
  std::vector<FoldGroupPair> per_fold;
  std::map<Statistic, StatisticSamples> samples;
};

// Per-fold statistics for folds 0..k-1 and, for every statistic, the sample
// of per-fold values in each group (undefined folds omitted).
MetricDistributions collect_metric_distributions(std::span<const PredictionRecord> records, int k);

// Number of folds implied by a record set (max fold_id + 1).
int fold_count(std::span<const PredictionRecord> records);

}  // namespace fairaudit
