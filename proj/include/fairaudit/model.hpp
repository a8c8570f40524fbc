#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fairaudit/data.hpp"

namespace fairaudit {

struct LogisticParams {
  double learning_rate = 1.0;
  int iterations = 500;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
  // Stop once the relative loss change falls below this.
  double tolerance = 1e-10;
};

struct TrainingInfo {
  int iterations = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

// Logistic model scoring P(outcome = unfavorable | x). Weights are on the
// original feature scale; labels are 1 (unfavorable) iff score >= threshold.
class TrainedModel {
 public:
  TrainedModel(Eigen::VectorXd weights, double intercept, double threshold = 0.5,
               TrainingInfo info = {});

  const Eigen::VectorXd& weights() const { return weights_; }
  double intercept() const { return intercept_; }
  double threshold() const { return threshold_; }
  const TrainingInfo& info() const { return info_; }
  std::size_t dim() const { return static_cast<std::size_t>(weights_.size()); }

  TrainedModel with_weight(std::size_t index, double value) const;
  TrainedModel with_threshold(double threshold) const;

 private:
  Eigen::VectorXd weights_;
  double intercept_;
  double threshold_;
  TrainingInfo info_;
};

// Model inputs for `dataset`: its encoded features, optionally followed by a
// group indicator column (1 = protected, 0 = unprotected).
FeatureMatrix design_matrix(const Dataset& dataset, bool include_group);

// Full-batch gradient descent on the L2-regularized mean log loss, run on
// standardized features. A step that would raise the loss is retried with
// half the learning rate, so the recorded loss never increases.
// `outcomes` are 0/1 with 1 = unfavorable.
TrainedModel train_logistic(const FeatureMatrix& x, std::span<const int> outcomes,
                            const LogisticParams& params, double threshold = 0.5);

// Score of a single design row; no dimension check.
double score_row(const TrainedModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& row);

std::vector<double> predict_scores(const TrainedModel& model, const FeatureMatrix& x);
std::vector<int> predict_labels(const TrainedModel& model, const FeatureMatrix& x);
int label_for(double score, double threshold);

// One held-out prediction. y_true / y_pred use 0 = favorable, 1 = unfavorable;
// score is the predicted probability of the unfavorable outcome.
struct PredictionRecord {
  RowId row_id = 0;
  int fold_id = 0;
  int y_true = 0;
  int y_pred = 0;
  double score = 0.0;
  Group group = Group::protected_group;

  bool operator==(const PredictionRecord&) const = default;
};

inline constexpr const char* kPredictionHeader = "row_id,fold_id,y_true,y_pred,score,group";

// Reads a prediction file. y_pred is taken as given even when it disagrees
// with the thresholded score, since external models own their thresholds.
std::vector<PredictionRecord> load_external_predictions(const std::filesystem::path& path,
                                                        const GroupLabels& labels);

void write_predictions(std::span<const PredictionRecord> records, const GroupLabels& labels,
                       const std::filesystem::path& path);

}  // namespace fairaudit
