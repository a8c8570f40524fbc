#include "fairaudit/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "fairaudit/errors.hpp"
#include "fairaudit/parallel.hpp"

namespace fairaudit {

namespace {
constexpr double kTieTolerance = 1e-12;
}  // namespace

Eigen::MatrixXd covariance_inverse(const FeatureMatrix& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (n < 2) throw MatrixError("covariance needs at least 2 rows");
  if (d == 0) throw MatrixError("covariance needs at least one feature");
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  const bool singular = ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
                        ldlt.vectorD().minCoeff() <= 1e-12 * std::max(1.0, cov.trace() / d);
  if (singular) {
    const double eps = 1e-6 * cov.trace() / static_cast<double>(d);
    if (!(eps > 0.0)) throw MatrixError("feature covariance is zero; cannot regularize");
    cov.diagonal().array() += eps;
    ldlt.compute(cov);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw MatrixError("covariance is not positive definite after regularization");
    }
  }
  Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(d, d));
  return 0.5 * (inv + inv.transpose());
}

double mahalanobis(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::MatrixXd& inv_cov) {
  if (x.size() != y.size() || inv_cov.rows() != x.size() || inv_cov.cols() != x.size()) {
    throw MatrixError("dimension mismatch in mahalanobis distance");
  }
  const Eigen::VectorXd diff = x - y;
  const double q = diff.dot(inv_cov * diff);
  if (q < 0.0) {
    if (q > -1e-10) return 0.0;
    throw MatrixError("negative quadratic form; inverse covariance is not positive definite");
  }
  return std::sqrt(q);
}

std::vector<MatchPair> nearest_neighbor_match(const Dataset& dataset,
                                              const Eigen::MatrixXd& inv_cov,
                                              MatchDirection direction) {
  const Group source_group = direction == MatchDirection::protected_to_unprotected
                                 ? Group::protected_group
                                 : Group::unprotected_group;
  std::vector<std::size_t> sources, targets;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (dataset.groups()[i] == source_group ? sources : targets).push_back(i);
  }
  if (targets.empty()) throw InsufficientDataError("matching target group is empty");

  const FeatureMatrix& x = dataset.features();
  const auto& ids = dataset.row_ids();
  std::vector<MatchPair> pairs(sources.size());
  parallel_for(sources.size(), [&](std::size_t s) {
    const auto src = static_cast<Eigen::Index>(sources[s]);
    const Eigen::VectorXd xs = x.row(src).transpose();
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_idx = targets.front();
    for (auto t : targets) {
      const double dist = mahalanobis(xs, x.row(static_cast<Eigen::Index>(t)).transpose(), inv_cov);
      // Distances within rounding noise of each other count as ties.
      const double tol = std::isfinite(best) ? kTieTolerance * std::max(1.0, best) : 0.0;
      if (dist < best - tol || (dist <= best + tol && ids[t] < ids[best_idx])) {
        best = dist;
        best_idx = t;
      }
    }
    pairs[s] = {ids[sources[s]], ids[best_idx], best};
  });
  return pairs;
}

std::vector<CounterfactualPrediction> counterfactual_flip(const Dataset& dataset,
                                                          const CvResult& cv) {
  if (!cv.include_group) {
    throw ConfigError(
        "counterfactual predictions need the group as a model feature; rerun with --include-race");
  }
  std::unordered_map<RowId, int> fold_of;
  for (const auto& r : cv.records) fold_of[r.row_id] = r.fold_id;

  const FeatureMatrix x = design_matrix(dataset, true);
  FeatureMatrix flipped = x;
  flipped.col(flipped.cols() - 1) = 1.0 - x.col(x.cols() - 1).array();

  std::vector<CounterfactualPrediction> out;
  out.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    auto it = fold_of.find(dataset.row_ids()[i]);
    if (it == fold_of.end()) {
      throw InputError("row_id " + std::to_string(dataset.row_ids()[i]) +
                       " has no cross-validation prediction");
    }
    const TrainedModel& model = cv.models.at(static_cast<std::size_t>(it->second));
    if (model.dim() != static_cast<std::size_t>(x.cols())) {
      throw ConfigError("fold model dimension does not match dataset features plus group");
    }
    const auto row = static_cast<Eigen::Index>(i);
    const double s0 = score_row(model, x.row(row));
    const double s1 = score_row(model, flipped.row(row));
    out.push_back({dataset.row_ids()[i], dataset.groups()[i], label_for(s0, model.threshold()),
                   label_for(s1, model.threshold())});
  }
  return out;
}

ContingencyTable2x2 build_contingency(std::span<const std::pair<int, int>> pairs) {
  ContingencyTable2x2 t;
  for (const auto& [a, b] : pairs) {
    if ((a != 0 && a != 1) || (b != 0 && b != 1)) {
      throw InputError("contingency entries must be binary predictions");
    }
    if (a == 0 && b == 0) ++t.n00;
    if (a == 0 && b == 1) ++t.n01;
    if (a == 1 && b == 0) ++t.n10;
    if (a == 1 && b == 1) ++t.n11;
  }
  return t;
}

McNemarResult mcnemar_midp_test(const ContingencyTable2x2& table, double alpha) {
  McNemarResult r;
  r.k = table.n01;
  r.n_minus_k = table.n10;
  r.test.tail = Tail::two_sided;
  r.test.alpha = alpha;
  r.test.statistic = static_cast<double>(r.k);
  r.test.df = static_cast<double>(table.discordant());
  r.test.degenerate = table.discordant() == 0;
  r.test.p_value = binomial_midp(r.k, table.discordant());
  return r;
}

}  // namespace fairaudit
