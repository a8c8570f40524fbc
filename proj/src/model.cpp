#include "fairaudit/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_set>

#include "fairaudit/errors.hpp"
#include "fairaudit/rng.hpp"

namespace fairaudit {

namespace {

// log(1 + e^z) without overflow.
double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double clamp_open_unit(double p) {
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  return std::clamp(p, lo, hi);
}

template <typename T>
T parse_number(const std::string& cell, const char* what, long line) {
  T value{};
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
    throw ParseError(std::string("invalid ") + what + " '" + cell + "'", line);
  }
  return value;
}

}  // namespace

TrainedModel::TrainedModel(Eigen::VectorXd weights, double intercept, double threshold,
                           TrainingInfo info)
    : weights_(std::move(weights)), intercept_(intercept), threshold_(threshold), info_(info) {
  if (!(threshold_ > 0.0 && threshold_ < 1.0)) {
    throw ConfigError("threshold must lie strictly between 0 and 1");
  }
  if (!weights_.allFinite() || !std::isfinite(intercept_)) {
    throw TrainingError("model weights must be finite");
  }
}

TrainedModel TrainedModel::with_weight(std::size_t index, double value) const {
  if (index >= dim()) throw ConfigError("weight index out of range");
  Eigen::VectorXd w = weights_;
  w(static_cast<Eigen::Index>(index)) = value;
  return TrainedModel(std::move(w), intercept_, threshold_, info_);
}

TrainedModel TrainedModel::with_threshold(double threshold) const {
  return TrainedModel(weights_, intercept_, threshold, info_);
}

FeatureMatrix design_matrix(const Dataset& dataset, bool include_group) {
  if (!include_group) return dataset.features();
  FeatureMatrix x(dataset.features().rows(), dataset.features().cols() + 1);
  x.leftCols(dataset.features().cols()) = dataset.features();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    x(static_cast<Eigen::Index>(i), x.cols() - 1) =
        dataset.groups()[i] == Group::protected_group ? 1.0 : 0.0;
  }
  return x;
}

TrainedModel train_logistic(const FeatureMatrix& x, std::span<const int> outcomes,
                            const LogisticParams& params, double threshold) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (n < 2 || static_cast<std::size_t>(n) != outcomes.size()) {
    throw TrainingError("training needs at least 2 rows with one outcome per row");
  }
  Eigen::VectorXd y(n);
  bool has0 = false, has1 = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = outcomes[static_cast<std::size_t>(i)];
    (outcomes[static_cast<std::size_t>(i)] == 1 ? has1 : has0) = true;
  }
  if (!has0 || !has1) throw TrainingError("training rows must contain both outcome values");
  if (!x.allFinite()) throw TrainingError("training features contain non-finite values");
  if (!(params.learning_rate > 0.0) || params.iterations < 0 || params.l2 < 0.0) {
    throw ConfigError("learning rate must be positive, iterations and l2 non-negative");
  }

  // Standardize; constant columns get scale 0 and keep a zero weight.
  const Eigen::RowVectorXd mean = x.colwise().mean();
  Eigen::RowVectorXd scale(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var = (x.col(j).array() - mean(j)).square().mean();
    scale(j) = var > 1e-24 ? 1.0 / std::sqrt(var) : 0.0;
  }
  const Eigen::MatrixXd z = ((x.rowwise() - mean).array().rowwise() * scale.array()).matrix();

  Rng rng(params.seed);
  Eigen::VectorXd w(d);
  for (Eigen::Index j = 0; j < d; ++j) w(j) = scale(j) > 0 ? 0.01 * rng.normal() : 0.0;
  double b = 0.0;

  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::VectorXd margin(n);
  auto loss_at = [&](const Eigen::VectorXd& wv, double bv) {
    margin.noalias() = z * wv;
    margin.array() += bv;
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += softplus(margin(i)) - y(i) * margin(i);
    return total * inv_n + 0.5 * params.l2 * wv.squaredNorm();
  };

  double loss = loss_at(w, b);
  if (!std::isfinite(loss)) throw TrainingError("initial loss is not finite");
  TrainingInfo info;
  info.initial_loss = loss;
  Eigen::VectorXd residual(n);
  Eigen::VectorXd grad_w(d);
  double lr = params.learning_rate;
  int it = 0;
  for (; it < params.iterations; ++it) {
    // `margin` holds z*w + b for the current weights here.
    for (Eigen::Index i = 0; i < n; ++i) residual(i) = sigmoid(margin(i)) - y(i);
    grad_w.noalias() = z.transpose() * residual;
    grad_w *= inv_n;
    grad_w += params.l2 * w;
    const double grad_b = residual.sum() * inv_n;

    double next_loss = 0.0;
    Eigen::VectorXd next_w;
    double next_b = 0.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      next_w = w - lr * grad_w;
      next_b = b - lr * grad_b;
      next_loss = loss_at(next_w, next_b);
      if (!std::isfinite(next_loss)) {
        throw TrainingError("training diverged (non-finite loss); try a smaller learning rate");
      }
      if (next_loss <= loss) {
        accepted = true;
        break;
      }
      lr *= 0.5;
    }
    if (!accepted) {
      margin.noalias() = z * w;
      margin.array() += b;
      break;
    }
    const double change = loss - next_loss;
    w = std::move(next_w);
    b = next_b;
    loss = next_loss;
    if (change <= params.tolerance * std::max(1.0, std::fabs(loss))) {
      ++it;
      break;
    }
  }
  info.iterations = it;
  info.final_loss = loss;

  Eigen::VectorXd weights(d);
  double intercept = b;
  for (Eigen::Index j = 0; j < d; ++j) {
    weights(j) = w(j) * scale(j);
    intercept -= weights(j) * mean(j);
  }
  return TrainedModel(std::move(weights), intercept, threshold, info);
}

double score_row(const TrainedModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  return clamp_open_unit(sigmoid(row.dot(model.weights()) + model.intercept()));
}

std::vector<double> predict_scores(const TrainedModel& model, const FeatureMatrix& x) {
  if (static_cast<std::size_t>(x.cols()) != model.dim()) {
    throw InputError("feature dimension mismatch: model expects " + std::to_string(model.dim()) +
                     ", rows have " + std::to_string(x.cols()));
  }
  std::vector<double> scores(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    scores[static_cast<std::size_t>(i)] = score_row(model, x.row(i));
  }
  return scores;
}

int label_for(double score, double threshold) {
  return score >= threshold ? kUnfavorable : kFavorable;
}

std::vector<int> predict_labels(const TrainedModel& model, const FeatureMatrix& x) {
  const auto scores = predict_scores(model, x);
  std::vector<int> labels(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) labels[i] = label_for(scores[i], model.threshold());
  return labels;
}

std::vector<PredictionRecord> load_external_predictions(const std::filesystem::path& path,
                                                        const GroupLabels& labels) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open prediction file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("prediction file is empty", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kPredictionHeader) {
    throw ParseError(std::string("prediction header must be '") + kPredictionHeader + "'", 1);
  }
  std::vector<PredictionRecord> records;
  std::unordered_set<RowId> seen;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 6) throw ParseError("expected 6 fields", line_no);
    PredictionRecord r;
    r.row_id = parse_number<RowId>(f[0], "row_id", line_no);
    r.fold_id = parse_number<int>(f[1], "fold_id", line_no);
    r.y_true = parse_number<int>(f[2], "y_true", line_no);
    r.y_pred = parse_number<int>(f[3], "y_pred", line_no);
    r.score = parse_number<double>(f[4], "score", line_no);
    r.group = labels.parse(f[5], line_no);
    if (r.fold_id < 0) throw ParseError("fold_id must be non-negative", line_no);
    if ((r.y_true != 0 && r.y_true != 1) || (r.y_pred != 0 && r.y_pred != 1)) {
      throw ParseError("y_true and y_pred must be 0 or 1", line_no);
    }
    if (!(r.score >= 0.0 && r.score <= 1.0)) {
      throw ParseError("score " + f[4] + " is outside [0,1]", line_no);
    }
    if (!seen.insert(r.row_id).second) {
      throw ParseError("duplicate row_id " + std::to_string(r.row_id), line_no);
    }
    records.push_back(r);
  }
  return records;
}

void write_predictions(std::span<const PredictionRecord> records, const GroupLabels& labels,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write prediction file " + path.string());
  out.precision(17);
  out << kPredictionHeader << '\n';
  for (const auto& r : records) {
    out << r.row_id << ',' << r.fold_id << ',' << r.y_true << ',' << r.y_pred << ',' << r.score
        << ',' << labels.label(r.group) << '\n';
  }
}

}  // namespace fairaudit
