#include "fairaudit/suite.hpp"

#include <stdexcept>

#include "fairaudit/errors.hpp"

namespace fairaudit {

namespace {

ComponentSpec stat_component(Statistic s, Tail tail) {
  return {std::string(to_string(s)), s, std::nullopt, tail};
}

std::vector<ComponentSpec> per_group_components() {
  return {{"protected", std::nullopt, Group::protected_group, Tail::two_sided},
          {"unprotected", std::nullopt, Group::unprotected_group, Tail::two_sided}};
}

std::vector<MetricSpec> build_registry() {
  using S = Statistic;
  using P = Procedure;
  using K = TestKind;
  std::vector<MetricSpec> r;
  r.push_back({"group_fairness", "Group Fairness", P::fold_statistics, K::welch_t,
               {stat_component(S::ppr, Tail::right)}, 1});
  r.push_back({"predictive_parity", "Predictive Parity", P::fold_statistics, K::welch_t,
               {stat_component(S::ppv, Tail::left)}, 1});
  r.push_back({"predictive_equality", "Predictive Equality", P::fold_statistics, K::welch_t,
               {stat_component(S::fpr, Tail::right)}, 1});
  r.push_back({"equal_opportunity", "Equal Opportunity", P::fold_statistics, K::welch_t,
               {stat_component(S::fnr, Tail::left)}, 1});
  r.push_back({"equalized_odds", "Equalized Odds", P::fold_statistics, K::welch_t,
               {stat_component(S::tpr, Tail::right), stat_component(S::fpr, Tail::right)}, 2});
  r.push_back({"conditional_use_accuracy", "Conditional Use Accuracy Equality",
               P::fold_statistics, K::welch_t,
               {stat_component(S::ppv, Tail::left), stat_component(S::npv, Tail::right)}, 2});
  r.push_back({"overall_accuracy", "Overall Accuracy Equality", P::fold_statistics, K::welch_t,
               {stat_component(S::accuracy, Tail::two_sided)}, 1});
  r.push_back({"treatment_equality", "Treatment Equality", P::fold_statistics, K::welch_t,
               {stat_component(S::fn_fp_ratio, Tail::left)}, 1});
  r.push_back({"calibration", "Calibration", P::calibration, K::chi2,
               {{"chi_squared", std::nullopt, std::nullopt, Tail::right}}, 1});
  r.push_back({"well_calibration", "Well Calibration", P::well_calibration, K::chi2,
               {{"chi_squared", std::nullopt, std::nullopt, Tail::right}}, 1});
  r.push_back({"balance_positive", "Balance for Positive Class", P::fold_statistics,
               K::welch_t, {stat_component(S::mean_score_favorable, Tail::left)}, 1});
  r.push_back({"balance_negative", "Balance for Negative Class", P::fold_statistics,
               K::welch_t, {stat_component(S::mean_score_unfavorable, Tail::left)}, 1});
  r.push_back({"causal_discrimination", "Causal Discrimination", P::causal, K::mcnemar_midp,
               per_group_components(), 2});
  r.push_back({"fairness_through_awareness", "Fairness Through Awareness", P::awareness,
               K::mcnemar_midp, per_group_components(), 2});
  return r;
}

// Welch results keyed by statistic, computed with a = unprotected and
// b = protected so the statistic has the sign of the disparity.
struct WelchCache {
  std::map<Statistic, TestResult> results;
};

const TestResult& welch_for(Statistic s, const StatisticSamples& samples, WelchCache& cache) {
  auto it = cache.results.find(s);
  if (it == cache.results.end()) {
    it = cache.results
             .emplace(s, welch_t(samples.unprotected_sample, samples.protected_sample,
                                 Tail::two_sided))
             .first;
  }
  return it->second;
}

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

MetricVerdict not_evaluable(const MetricSpec& spec, double alpha, std::string reason) {
  MetricVerdict v;
  v.id = spec.id;
  v.alpha = alpha;
  v.verdict = Verdict::not_evaluable;
  v.reason = std::move(reason);
  return v;
}

MetricVerdict evaluate_t_metric(const MetricSpec& spec, const AuditInputs& inputs, double alpha,
                                WelchCache& cache) {
  if (!inputs.distributions) return not_evaluable(spec, alpha, "no fold statistics available");
  MetricVerdict v;
  v.id = spec.id;
  v.alpha = alpha;
  for (const auto& comp : spec.components) {
    const auto& samples = inputs.distributions->samples.at(*comp.statistic);
    if (samples.insufficient) return not_evaluable(spec, alpha, *samples.insufficient);
    const TestResult& base = welch_for(*comp.statistic, samples, cache);
    ComponentResult c;
    c.name = comp.name;
    c.statistic = comp.statistic;
    c.tail = comp.tail;
    c.disparity = mean_of(samples.unprotected_sample) - mean_of(samples.protected_sample);
    c.n_protected = samples.protected_sample.size();
    c.n_unprotected = samples.unprotected_sample.size();
    c.test = base;
    c.test.tail = comp.tail;
    c.test.alpha = alpha;
    c.test.p_value = base.degenerate && base.statistic == 0.0
                         ? 1.0
                         : t_tail_p(base.statistic, base.df, comp.tail);
    c.violation_p = c.test.p_value;
    if (comp.tail != Tail::two_sided) {
      c.opposite_p = base.degenerate && base.statistic == 0.0
                         ? 1.0
                         : t_tail_p(base.statistic, base.df, opposite(comp.tail));
    }
    v.components.push_back(std::move(c));
  }
  v.verdict = decide(v.components, alpha);
  return v;
}

MetricVerdict evaluate_chi2_metric(const MetricSpec& spec, const AuditInputs& inputs,
                                   double alpha) {
  if (!inputs.calibration) return not_evaluable(spec, alpha, "no calibration table available");
  ChiSquareTest test;
  try {
    test = spec.procedure == Procedure::calibration
               ? calibration_chi2(*inputs.calibration, alpha)
               : well_calibration_chi2(*inputs.calibration, alpha);
  } catch (const InsufficientDataError& e) {
    return not_evaluable(spec, alpha, e.what());
  }
  MetricVerdict v;
  v.id = spec.id;
  v.alpha = alpha;
  ComponentResult c;
  c.name = spec.components.front().name;
  c.tail = Tail::right;
  c.test = test.result;
  c.violation_p = test.result.p_value;
  for (const auto& bin : inputs.calibration->bins) {
    c.n_protected += static_cast<std::size_t>(bin.alpha_p);
    c.n_unprotected += static_cast<std::size_t>(bin.beta_u);
  }
  v.components.push_back(std::move(c));
  v.verdict = decide(v.components, alpha);
  return v;
}

MetricVerdict evaluate_midp_metric(const MetricSpec& spec, const AuditInputs& inputs,
                                   double alpha) {
  const bool causal = spec.procedure == Procedure::causal;
  const auto& tables = causal ? inputs.causal : inputs.awareness;
  if (!tables) {
    return not_evaluable(spec, alpha,
                         causal ? inputs.causal_unavailable : inputs.awareness_unavailable);
  }
  MetricVerdict v;
  v.id = spec.id;
  v.alpha = alpha;
  for (const auto& comp : spec.components) {
    const Group g = *comp.group;
    const ContingencyTable2x2& table = tables->of(g);
    const McNemarResult m = mcnemar_midp_test(table, alpha);
    ComponentResult c;
    c.name = comp.name;
    c.group = g;
    c.tail = Tail::two_sided;
    c.test = m.test;
    c.k = m.k;
    c.n_minus_k = m.n_minus_k;
    (g == Group::protected_group ? c.n_protected : c.n_unprotected) =
        static_cast<std::size_t>(table.total());
    // Against the protected group: a protected row does better once treated
    // as unprotected (n10 > n01), or an unprotected row does worse once
    // treated as protected (n01 > n10).
    const long against = g == Group::protected_group ? table.n10 : table.n01;
    const long favoring = g == Group::protected_group ? table.n01 : table.n10;
    const double p = m.test.p_value;
    c.violation_p = against >= favoring ? p : 1.0;
    c.opposite_p = favoring >= against ? p : 1.0;
    v.components.push_back(std::move(c));
  }
  v.verdict = decide(v.components, alpha);
  return v;
}

MetricVerdict evaluate_impl(const MetricSpec& spec, const AuditInputs& inputs, double alpha,
                            WelchCache& cache) {
  const double corrected = bonferroni(alpha, spec.alpha_divisor);
  switch (spec.test) {
    case TestKind::welch_t:
      return evaluate_t_metric(spec, inputs, corrected, cache);
    case TestKind::chi2:
      return evaluate_chi2_metric(spec, inputs, corrected);
    case TestKind::mcnemar_midp:
      return evaluate_midp_metric(spec, inputs, corrected);
  }
  throw std::logic_error("unhandled test kind");
}

}  // namespace

std::string_view to_string(TestKind kind) {
  switch (kind) {
    case TestKind::welch_t: return "welch_t";
    case TestKind::chi2: return "chi2";
    case TestKind::mcnemar_midp: return "mcnemar_midp";
  }
  return "?";
}

std::string_view to_string(Procedure procedure) {
  switch (procedure) {
    case Procedure::fold_statistics: return "fold_statistics";
    case Procedure::calibration: return "calibration";
    case Procedure::well_calibration: return "well_calibration";
    case Procedure::causal: return "causal";
    case Procedure::awareness: return "awareness";
  }
  return "?";
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::violation: return "violation";
    case Verdict::no_violation: return "no_violation";
    case Verdict::reverse_disparity: return "reverse_disparity";
    case Verdict::not_evaluable: return "not_evaluable";
  }
  return "?";
}

Verdict verdict_from_string(std::string_view text) {
  for (auto v : {Verdict::violation, Verdict::no_violation, Verdict::reverse_disparity,
                 Verdict::not_evaluable}) {
    if (to_string(v) == text) return v;
  }
  throw ParseError("unknown verdict '" + std::string(text) + "'", 0);
}

const std::vector<MetricSpec>& registry() {
  static const std::vector<MetricSpec> specs = build_registry();
  return specs;
}

const MetricSpec& find_metric(std::string_view id) {
  for (const auto& spec : registry()) {
    if (spec.id == id) return spec;
  }
  throw ConfigError("unknown metric '" + std::string(id) + "'");
}

Verdict decide(const std::vector<ComponentResult>& components, double alpha) {
  bool violation = false, reverse = false;
  for (const auto& c : components) {
    if (c.violation_p < alpha) violation = true;
    if (c.opposite_p && *c.opposite_p < alpha) reverse = true;
  }
  if (violation) return Verdict::violation;
  if (reverse) return Verdict::reverse_disparity;
  return Verdict::no_violation;
}

MetricVerdict evaluate_metric(const MetricSpec& spec, const AuditInputs& inputs, double alpha) {
  WelchCache cache;
  return evaluate_impl(spec, inputs, alpha, cache);
}

std::vector<MetricVerdict> evaluate_all(const AuditInputs& inputs, double alpha) {
  WelchCache cache;
  std::vector<MetricVerdict> out;
  for (const auto& spec : registry()) out.push_back(evaluate_impl(spec, inputs, alpha, cache));
  return out;
}

}  // namespace fairaudit
