#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairaudit/cv.hpp"
#include "fairaudit/data.hpp"
#include "fairaudit/stats.hpp"

namespace fairaudit {

// Cross-tabulation of binary predictions: rows are the original prediction,
// columns the comparator (counterfactual or neighbor). Index 0 is favorable.
struct ContingencyTable2x2 {
  long n00 = 0;
  long n01 = 0;  // original favorable, comparator unfavorable
  long n10 = 0;  // original unfavorable, comparator favorable
  long n11 = 0;
  std::string row_label = "original";
  std::string col_label = "comparator";

  long discordant() const { return n01 + n10; }
  long total() const { return n00 + n01 + n10 + n11; }
  bool operator==(const ContingencyTable2x2&) const = default;
};

struct MatchPair {
  RowId source = 0;
  RowId matched = 0;
  double distance = 0.0;
};

enum class MatchDirection { protected_to_unprotected, unprotected_to_protected };

// Inverse of the sample covariance of `x` (rows = observations). A singular
// covariance is regularized with eps * I, eps = 1e-6 * trace / dim.
Eigen::MatrixXd covariance_inverse(const FeatureMatrix& x);

double mahalanobis(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::MatrixXd& inv_cov);

// For every row of the direction's source group, the opposite-group row at
// the smallest Mahalanobis distance over dataset features (which exclude the
// group and outcome). Ties (equal up to a relative 1e-12) go to the smaller
// row_id; targets may be reused.
std::vector<MatchPair> nearest_neighbor_match(const Dataset& dataset,
                                              const Eigen::MatrixXd& inv_cov,
                                              MatchDirection direction);

struct CounterfactualPrediction {
  RowId row_id = 0;
  Group group = Group::protected_group;
  int original = 0;
  int flipped = 0;
};

// Scores every row with the model of the fold that held it out, once as is
// and once with the group indicator toggled. Requires models trained with
// the group indicator; throws ConfigError otherwise.
std::vector<CounterfactualPrediction> counterfactual_flip(const Dataset& dataset,
                                                          const CvResult& cv);

ContingencyTable2x2 build_contingency(std::span<const std::pair<int, int>> pairs);

struct McNemarResult {
  TestResult test;
  long k = 0;          // n01
  long n_minus_k = 0;  // n10
};

// Mid-p McNemar test on the discordant cells; symmetric in (n01, n10).
McNemarResult mcnemar_midp_test(const ContingencyTable2x2& table, double alpha = 0.05);

}  // namespace fairaudit
