#include "fairaudit/cv.hpp"

#include <algorithm>
#include <numeric>

#include "fairaudit/errors.hpp"
#include "fairaudit/parallel.hpp"
#include "fairaudit/rng.hpp"

namespace fairaudit {

namespace {

std::optional<double> ratio(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

}  // namespace

int FoldPlan::fold_of(RowId id) const {
  auto it = assignments.find(id);
  if (it == assignments.end()) {
    throw InputError("row_id " + std::to_string(id) + " is not covered by the fold plan");
  }
  return it->second;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (const auto& [id, fold] : assignments) ++sizes[static_cast<std::size_t>(fold)];
  return sizes;
}

FoldPlan make_folds(const Dataset& dataset, int k, std::uint64_t seed, bool stratified) {
  const std::size_t n = dataset.size();
  if (k < 2 || static_cast<std::size_t>(k) > n) {
    throw ConfigError("fold count must satisfy 2 <= K <= n (K=" + std::to_string(k) +
                      ", n=" + std::to_string(n) + ")");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto& ids = dataset.row_ids();
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ids[a] < ids[b]; });

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.stratified = stratified;
  Rng rng(seed);
  if (!stratified) {
    rng.shuffle(std::span(order));
    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < static_cast<std::size_t>(k); ++f) {
      const std::size_t size = base + (f < extra ? 1 : 0);
      for (std::size_t j = 0; j < size; ++j) plan.assignments[ids[order[pos++]]] = static_cast<int>(f);
    }
    return plan;
  }
  std::vector<std::size_t> favorable, unfavorable;
  for (auto i : order) {
    (dataset.outcomes()[i] == kFavorable ? favorable : unfavorable).push_back(i);
  }
  rng.shuffle(std::span(favorable));
  rng.shuffle(std::span(unfavorable));
  favorable.insert(favorable.end(), unfavorable.begin(), unfavorable.end());
  for (std::size_t pos = 0; pos < favorable.size(); ++pos) {
    plan.assignments[ids[favorable[pos]]] = static_cast<int>(pos % static_cast<std::size_t>(k));
  }
  return plan;
}

CvResult run_cv(const Dataset& dataset, const FoldPlan& plan, const CvConfig& config) {
  if (plan.assignments.size() != dataset.size()) {
    throw InputError("fold plan covers " + std::to_string(plan.assignments.size()) +
                     " rows but the dataset has " + std::to_string(dataset.size()));
  }
  const std::size_t k = static_cast<std::size_t>(plan.k);
  std::vector<int> fold(dataset.size());
  std::vector<std::size_t> by_id(dataset.size());
  std::iota(by_id.begin(), by_id.end(), 0);
  const auto& ids = dataset.row_ids();
  std::sort(by_id.begin(), by_id.end(), [&](auto a, auto b) { return ids[a] < ids[b]; });
  for (std::size_t i = 0; i < dataset.size(); ++i) fold[i] = plan.fold_of(ids[i]);

  const FeatureMatrix x = design_matrix(dataset, config.include_group);
  std::vector<std::vector<PredictionRecord>> fold_records(k);
  std::vector<std::optional<TrainedModel>> models(k);

  parallel_for(
      k,
      [&](std::size_t f) {
        // Row-id order keeps training sums independent of dataset row order.
        std::vector<std::size_t> train, test;
        for (auto i : by_id) (fold[i] == static_cast<int>(f) ? test : train).push_back(i);
        FeatureMatrix xt(static_cast<Eigen::Index>(train.size()), x.cols());
        std::vector<int> yt(train.size());
        bool has_fav = false, has_unfav = false;
        for (std::size_t r = 0; r < train.size(); ++r) {
          xt.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(train[r]));
          yt[r] = dataset.outcomes()[train[r]];
          (yt[r] == kFavorable ? has_fav : has_unfav) = true;
        }
        if (!has_fav || !has_unfav) {
          throw FoldError("training split for fold " + std::to_string(f) +
                              " lacks one outcome class",
                          static_cast<int>(f));
        }
        LogisticParams params = config.params;
        params.seed = config.params.seed + f;
        TrainedModel model = train_logistic(xt, yt, params, config.threshold);

        FeatureMatrix xs(static_cast<Eigen::Index>(test.size()), x.cols());
        for (std::size_t r = 0; r < test.size(); ++r) {
          xs.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(test[r]));
        }
        const auto scores = predict_scores(model, xs);
        auto& out = fold_records[f];
        for (std::size_t r = 0; r < test.size(); ++r) {
          const auto i = test[r];
          out.push_back({ids[i], static_cast<int>(f), dataset.outcomes()[i],
                         label_for(scores[r], config.threshold), scores[r], dataset.groups()[i]});
        }
        models[f] = std::move(model);
      },
      config.workers);

  CvResult result;
  result.include_group = config.include_group;
  for (std::size_t f = 0; f < k; ++f) {
    result.records.insert(result.records.end(), fold_records[f].begin(), fold_records[f].end());
    result.models.push_back(std::move(*models[f]));
  }
  return result;
}

std::string_view to_string(Statistic s) {
  switch (s) {
    case Statistic::ppr: return "ppr";
    case Statistic::tpr: return "tpr";
    case Statistic::fpr: return "fpr";
    case Statistic::fnr: return "fnr";
    case Statistic::ppv: return "ppv";
    case Statistic::npv: return "npv";
    case Statistic::accuracy: return "accuracy";
    case Statistic::fn_fp_ratio: return "fn_fp_ratio";
    case Statistic::mean_score_favorable: return "mean_score_favorable";
    case Statistic::mean_score_unfavorable: return "mean_score_unfavorable";
  }
  return "?";
}

std::optional<Statistic> statistic_from_string(std::string_view name) {
  for (auto s : kAllStatistics) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

namespace {

GroupFoldStats stats_for(std::span<const PredictionRecord> records, Group group, int fold_id) {
  GroupFoldStats st;
  st.fold_id = fold_id;
  st.group = group;
  auto& c = st.counts;
  double score_fav = 0.0, score_unfav = 0.0;
  for (const auto& r : records) {
    if (r.group != group) continue;
    const bool pred_fav = r.y_pred == kFavorable;
    const bool true_fav = r.y_true == kFavorable;
    if (pred_fav && true_fav) ++c.tp;
    if (pred_fav && !true_fav) ++c.fp;
    if (!pred_fav && !true_fav) ++c.tn;
    if (!pred_fav && true_fav) ++c.fn;
    (true_fav ? score_fav : score_unfav) += r.score;
  }
  const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
  auto set = [&](Statistic s, std::optional<double> v) {
    st.values[static_cast<std::size_t>(s)] = v;
  };
  set(Statistic::ppr, ratio(tp + fp, tp + fp + tn + fn));
  set(Statistic::tpr, ratio(tp, tp + fn));
  set(Statistic::fpr, ratio(fp, fp + tn));
  set(Statistic::fnr, ratio(fn, tp + fn));
  set(Statistic::ppv, ratio(tp, tp + fp));
  set(Statistic::npv, ratio(tn, tn + fn));
  set(Statistic::accuracy, ratio(tp + tn, tp + fp + tn + fn));
  set(Statistic::fn_fp_ratio, ratio(fn, fp));
  set(Statistic::mean_score_favorable, ratio(score_fav, tp + fn));
  set(Statistic::mean_score_unfavorable, ratio(score_unfav, fp + tn));
  return st;
}

}  // namespace

FoldGroupPair grouped_confusion_stats(std::span<const PredictionRecord> fold_records) {
  const int fold_id = fold_records.empty() ? 0 : fold_records.front().fold_id;
  for (const auto& r : fold_records) {
    if (r.fold_id != fold_id) throw InputError("records passed to a fold span several folds");
  }
  return {stats_for(fold_records, Group::protected_group, fold_id),
          stats_for(fold_records, Group::unprotected_group, fold_id)};
}

int fold_count(std::span<const PredictionRecord> records) {
  int k = 0;
  for (const auto& r : records) k = std::max(k, r.fold_id + 1);
  return k;
}

MetricDistributions collect_metric_distributions(std::span<const PredictionRecord> records,
                                                 int k) {
  if (k < 1) throw ConfigError("fold count must be positive");
  std::vector<std::vector<PredictionRecord>> by_fold(static_cast<std::size_t>(k));
  for (const auto& r : records) {
    if (r.fold_id >= k) {
      throw InputError("record fold_id " + std::to_string(r.fold_id) + " is outside [0," +
                       std::to_string(k) + ")");
    }
    by_fold[static_cast<std::size_t>(r.fold_id)].push_back(r);
  }
  MetricDistributions out;
  out.k = k;
  for (int f = 0; f < k; ++f) {
    auto pair = grouped_confusion_stats(by_fold[static_cast<std::size_t>(f)]);
    pair.protected_stats.fold_id = pair.unprotected_stats.fold_id = f;
    out.per_fold.push_back(std::move(pair));
  }
  for (auto s : kAllStatistics) {
    StatisticSamples samples;
    for (const auto& pair : out.per_fold) {
      if (const auto& v = pair.protected_stats.value(s)) {
        samples.protected_sample.push_back(*v);
        samples.protected_folds.push_back(pair.protected_stats.fold_id);
      }
      if (const auto& v = pair.unprotected_stats.value(s)) {
        samples.unprotected_sample.push_back(*v);
        samples.unprotected_folds.push_back(pair.unprotected_stats.fold_id);
      }
    }
    if (samples.protected_sample.size() < 2 || samples.unprotected_sample.size() < 2) {
      samples.insufficient = std::string(to_string(s)) + " is defined in " +
                             std::to_string(samples.protected_sample.size()) +
                             " protected and " +
                             std::to_string(samples.unprotected_sample.size()) +
                             " unprotected folds; at least 2 each are required";
    }
    out.samples.emplace(s, std::move(samples));
  }
  return out;
}

}  // namespace fairaudit
