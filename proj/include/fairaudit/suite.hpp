#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/calibration.hpp"
#include "fairaudit/cv.hpp"
#include "fairaudit/similarity.hpp"
#include "fairaudit/stats.hpp"

namespace fairaudit {

enum class TestKind { welch_t, chi2, mcnemar_midp };

enum class Procedure { fold_statistics, calibration, well_calibration, causal, awareness };

std::string_view to_string(TestKind kind);
std::string_view to_string(Procedure procedure);

struct ComponentSpec {
  std::string name;
  // Fold statistic compared between groups (welch_t components only).
  std::optional<Statistic> statistic;
  // Group whose table is tested (mcnemar_midp components only).
  std::optional<Group> group;
  // Direction in which a disparity counts against the protected group.
  Tail tail = Tail::two_sided;
};

struct MetricSpec {
  std::string id;
  std::string title;
  Procedure procedure = Procedure::fold_statistics;
  TestKind test = TestKind::welch_t;
  std::vector<ComponentSpec> components;
  // Bonferroni divisor applied to alpha; the component count for joint metrics.
  int alpha_divisor = 1;
};

// The fourteen fairness definitions, in report order.
const std::vector<MetricSpec>& registry();
const MetricSpec& find_metric(std::string_view id);

enum class Verdict { violation, no_violation, reverse_disparity, not_evaluable };

std::string_view to_string(Verdict verdict);
Verdict verdict_from_string(std::string_view text);

struct ComponentResult {
  std::string name;
  std::optional<Statistic> statistic;
  std::optional<Group> group;
  Tail tail = Tail::two_sided;
  // mean(unprotected sample) - mean(protected sample).
  std::optional<double> disparity;
  TestResult test;
  // p-value in the discriminatory direction, compared against the corrected alpha.
  double violation_p = 1.0;
  // p-value in the direction favoring the protected group; empty for
  // two-sided and chi-squared components.
  std::optional<double> opposite_p;
  std::size_t n_protected = 0;
  std::size_t n_unprotected = 0;
  // Discordant counts for mid-p components.
  std::optional<long> k;
  std::optional<long> n_minus_k;
};

struct MetricVerdict {
  std::string id;
  Verdict verdict = Verdict::not_evaluable;
  double alpha = 0.05;  // corrected level used for every component
  std::vector<ComponentResult> components;
  std::optional<std::string> reason;
};

struct GroupTables {
  ContingencyTable2x2 protected_table;
  ContingencyTable2x2 unprotected_table;

  const ContingencyTable2x2& of(Group g) const {
    return g == Group::protected_group ? protected_table : unprotected_table;
  }
  bool operator==(const GroupTables&) const = default;
};

// Everything the metrics consume. A missing piece makes the metrics that need
// it not_evaluable, with the matching *_unavailable text as the reason.
struct AuditInputs {
  std::optional<MetricDistributions> distributions;
  std::optional<CalibrationTable> calibration;
  std::optional<GroupTables> causal;
  std::optional<GroupTables> awareness;
  std::string causal_unavailable = "counterfactual predictions were not computed";
  std::string awareness_unavailable = "nearest-neighbor matches were not computed";
};

MetricVerdict evaluate_metric(const MetricSpec& spec, const AuditInputs& inputs,
                              double alpha = 0.05);

// One verdict per registry entry, in registry order. Each fold statistic is
// tested once and shared by every metric that uses it.
std::vector<MetricVerdict> evaluate_all(const AuditInputs& inputs, double alpha = 0.05);

// Three-way decision from components already evaluated at `alpha`.
Verdict decide(const std::vector<ComponentResult>& components, double alpha);

}  // namespace fairaudit
