#include "fairaudit/synth.hpp"

#include <cmath>
#include <string>

#include "fairaudit/errors.hpp"
#include "fairaudit/rng.hpp"

namespace fairaudit {

namespace {

constexpr double kDefaultCoefficients[] = {0.8, -0.6, 0.4, -0.2, 0.1};

}  // namespace

Dataset generate(const SynthConfig& config) {
  if (!(config.group_mix > 0.0 && config.group_mix < 1.0)) {
    throw ConfigError("group_mix must lie strictly between 0 and 1");
  }
  if (config.n < 2) throw ConfigError("synthetic population needs at least 2 rows");
  std::vector<double> beta = config.coefficients;
  if (beta.empty()) {
    for (std::size_t j = 0; j < config.d; ++j) beta.push_back(kDefaultCoefficients[j % 5]);
  }
  if (beta.size() != config.d) throw ConfigError("coefficient count must equal d");

  Rng rng(config.seed);
  const auto n = static_cast<Eigen::Index>(config.n);
  const auto d = static_cast<Eigen::Index>(config.d);
  FeatureMatrix x(n, d);
  std::vector<RowId> ids(config.n);
  std::vector<int> outcomes(config.n);
  std::vector<Group> groups(config.n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    ids[r] = i;
    groups[r] = rng.bernoulli(config.group_mix) ? Group::protected_group : Group::unprotected_group;
    double logit = config.intercept;
    for (Eigen::Index j = 0; j < d; ++j) {
      x(i, j) = rng.normal();
      logit += beta[static_cast<std::size_t>(j)] * x(i, j);
    }
    if (groups[r] == Group::protected_group) logit += config.group_shift;
    const double p_unfavorable = 1.0 / (1.0 + std::exp(-logit));
    outcomes[r] = rng.bernoulli(p_unfavorable) ? kUnfavorable : kFavorable;
  }
  std::vector<std::string> names;
  for (std::size_t j = 0; j < config.d; ++j) names.push_back("x" + std::to_string(j));
  Dataset out(std::move(ids), std::move(x), std::move(names), std::move(outcomes),
              std::move(groups));
  if (out.count(Group::protected_group) == 0 || out.count(Group::unprotected_group) == 0) {
    throw ConfigError("generated population contains only one group; increase n");
  }
  return out;
}

BiasMechanism bias_mechanism_from_string(std::string_view name) {
  if (name == "outcome_shift") return BiasMechanism::outcome_shift;
  if (name == "label_noise_on_protected") return BiasMechanism::label_noise_on_protected;
  throw ConfigError("unknown bias mechanism '" + std::string(name) + "'");
}

Dataset inject_bias(const Dataset& dataset, BiasMechanism mechanism, double magnitude,
                    std::uint64_t seed) {
  if (!(magnitude >= 0.0 && magnitude <= 1.0)) {
    throw ConfigError("bias magnitude must lie in [0, 1]");
  }
  if (magnitude == 0.0) return dataset;
  Rng rng(seed);
  std::vector<int> outcomes = dataset.outcomes();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (dataset.groups()[i] != Group::protected_group) continue;
    switch (mechanism) {
      case BiasMechanism::outcome_shift:
        if (outcomes[i] == kFavorable && rng.bernoulli(magnitude)) outcomes[i] = kUnfavorable;
        break;
      case BiasMechanism::label_noise_on_protected:
        if (rng.bernoulli(magnitude)) outcomes[i] = 1 - outcomes[i];
        break;
    }
  }
  return dataset.with_outcomes(std::move(outcomes));
}

Schema synth_schema(const Dataset& dataset) {
  Schema schema;
  for (const auto& name : dataset.feature_names()) {
    schema.feature_columns.push_back({name, FeatureKind::numeric});
  }
  schema.outcome_column = "outcome";
  schema.group_column = "group";
  schema.id_column = "row_id";
  schema.groups = dataset.labels();
  return schema;
}

}  // namespace fairaudit
