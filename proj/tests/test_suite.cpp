#include <set>

#include "doctest.h"
#include "fairaudit/cv.hpp"
#include "fairaudit/errors.hpp"
#include "fairaudit/rng.hpp"
#include "fairaudit/suite.hpp"
#include "fairaudit/synth.hpp"
#include "oracles.hpp"

using namespace fairaudit;

namespace {

MetricDistributions distributions_from(const std::map<Statistic, std::pair<std::vector<double>,
                                                                           std::vector<double>>>& m) {
  MetricDistributions d;
  for (auto s : kAllStatistics) {
    StatisticSamples ss;
    auto it = m.find(s);
    if (it != m.end()) {
      ss.protected_sample = it->second.first;
      ss.unprotected_sample = it->second.second;
    } else {
      ss.protected_sample = {0.1, 0.2, 0.3};
      ss.unprotected_sample = {0.1, 0.2, 0.3};
    }
    d.samples[s] = ss;
  }
  return d;
}

AuditInputs inputs_for(Statistic s, std::vector<double> prot, std::vector<double> unprot) {
  AuditInputs in;
  in.distributions = distributions_from({{s, {std::move(prot), std::move(unprot)}}});
  return in;
}

MetricVerdict audit_synth(double shift, std::uint64_t seed) {
  SynthConfig sc;
  sc.n = 2000;
  sc.group_shift = shift;
  sc.seed = seed;
  const Dataset d = generate(sc);
  const CvResult cv = run_cv(d, make_folds(d, 10, seed), {});
  AuditInputs in;
  in.distributions = collect_metric_distributions(cv.records, 10);
  return evaluate_metric(find_metric("group_fairness"), in);
}

}  // namespace

TEST_CASE("registry contents") {
  const auto& r = registry();
  REQUIRE(r.size() == 14);
  const std::vector<std::string> ids = {
      "group_fairness",     "predictive_parity",        "predictive_equality",
      "equal_opportunity",  "equalized_odds",           "conditional_use_accuracy",
      "overall_accuracy",   "treatment_equality",       "calibration",
      "well_calibration",   "balance_positive",         "balance_negative",
      "causal_discrimination", "fairness_through_awareness"};
  for (std::size_t i = 0; i < 14; ++i) CHECK(r[i].id == ids[i]);
  for (const auto& spec : r) {
    CHECK_FALSE(spec.components.empty());
    if (spec.components.size() > 1) CHECK(spec.alpha_divisor == static_cast<int>(spec.components.size()));
    for (const auto& c : spec.components) {
      if (spec.test == TestKind::welch_t) {
        REQUIRE(c.statistic.has_value());
        CHECK(statistic_from_string(to_string(*c.statistic)) == c.statistic);
      }
      if (spec.test == TestKind::mcnemar_midp) CHECK(c.group.has_value());
    }
  }
  CHECK(find_metric("group_fairness").components[0].tail == Tail::right);
  CHECK(find_metric("predictive_parity").components[0].tail == Tail::left);
  CHECK(find_metric("predictive_equality").components[0].tail == Tail::right);
  CHECK(find_metric("equal_opportunity").components[0].tail == Tail::left);
  CHECK(find_metric("overall_accuracy").components[0].tail == Tail::two_sided);
  CHECK(find_metric("treatment_equality").components[0].statistic == Statistic::fn_fp_ratio);
  CHECK(find_metric("balance_positive").components[0].tail == Tail::left);
  CHECK(find_metric("balance_negative").components[0].tail == Tail::left);
  const auto& cua = find_metric("conditional_use_accuracy");
  CHECK(cua.components[0].tail == Tail::left);
  CHECK(cua.components[1].tail == Tail::right);
  CHECK_THROWS_AS(find_metric("nope"), ConfigError);
}

TEST_CASE("equalized odds tests each component at alpha / 2") {
  AuditInputs in = inputs_for(Statistic::tpr, {0.5, 0.6, 0.7}, {0.5, 0.6, 0.7});
  const auto v = evaluate_metric(find_metric("equalized_odds"), in, 0.05);
  CHECK(v.alpha == 0.025);
  REQUIRE(v.components.size() == 2);
  CHECK(v.components[0].test.alpha == 0.025);
}

TEST_CASE("identical samples give zero disparity and no violation") {
  const auto v = evaluate_metric(find_metric("group_fairness"),
                                 inputs_for(Statistic::ppr, {0.4, 0.5, 0.45, 0.6},
                                            {0.4, 0.5, 0.45, 0.6}));
  CHECK(v.verdict == Verdict::no_violation);
  CHECK(*v.components[0].disparity == 0.0);
  CHECK(v.components[0].violation_p == doctest::Approx(0.5));
  CHECK(*v.components[0].opposite_p == doctest::Approx(0.5));
  const auto acc = evaluate_metric(find_metric("overall_accuracy"),
                                   inputs_for(Statistic::accuracy, {0.7, 0.8, 0.75},
                                              {0.7, 0.8, 0.75}));
  CHECK(acc.components[0].test.p_value == doctest::Approx(1.0));
}

TEST_CASE("disparity sign and tails") {
  // Unprotected PPR higher: right-tailed violation.
  const auto v = evaluate_metric(find_metric("group_fairness"),
                                 inputs_for(Statistic::ppr, {0.30, 0.32, 0.31, 0.29},
                                            {0.50, 0.52, 0.49, 0.51}));
  CHECK(*v.components[0].disparity > 0);
  CHECK(v.components[0].test.statistic > 0);
  CHECK(v.verdict == Verdict::violation);
  // Reversed: reverse disparity.
  const auto r = evaluate_metric(find_metric("group_fairness"),
                                 inputs_for(Statistic::ppr, {0.50, 0.52, 0.49, 0.51},
                                            {0.30, 0.32, 0.31, 0.29}));
  CHECK(r.verdict == Verdict::reverse_disparity);
  // Equal opportunity is left tailed: protected FNR higher is a violation.
  const auto e = evaluate_metric(find_metric("equal_opportunity"),
                                 inputs_for(Statistic::fnr, {0.40, 0.42, 0.41, 0.39},
                                            {0.20, 0.22, 0.21, 0.19}));
  CHECK(*e.components[0].disparity < 0);
  CHECK(e.verdict == Verdict::violation);
}

TEST_CASE("swapping groups maps p to 1 - p and flips the verdict") {
  Rng rng(5);
  int flips = 0;
  for (int rep = 0; rep < 40; ++rep) {
    const auto a = testutil::random_sample(rng, 12, 0.5, 0.05);
    const auto b = testutil::random_sample(rng, 12, 0.5 + 0.04 * rng.normal(), 0.05);
    for (const char* id : {"group_fairness", "predictive_parity", "treatment_equality"}) {
      const auto& spec = find_metric(id);
      const Statistic s = *spec.components[0].statistic;
      const auto v1 = evaluate_metric(spec, inputs_for(s, a, b));
      const auto v2 = evaluate_metric(spec, inputs_for(s, b, a));
      CHECK(v1.components[0].violation_p ==
            doctest::Approx(1.0 - v2.components[0].violation_p).epsilon(1e-12));
      if (v1.verdict == Verdict::violation) {
        CHECK(v2.verdict == Verdict::reverse_disparity);
        ++flips;
      }
      if (v1.verdict == Verdict::reverse_disparity) CHECK(v2.verdict == Verdict::violation);
      if (v1.verdict == Verdict::no_violation) CHECK(v2.verdict == Verdict::no_violation);
    }
  }
  CHECK(flips > 0);
}

TEST_CASE("verdict rule") {
  auto comp = [](double vp, std::optional<double> op) {
    ComponentResult c;
    c.violation_p = vp;
    c.opposite_p = op;
    return c;
  };
  CHECK(decide({comp(0.01, 0.99)}, 0.05) == Verdict::violation);
  CHECK(decide({comp(0.5, 0.5)}, 0.05) == Verdict::no_violation);
  CHECK(decide({comp(0.99, 0.01)}, 0.05) == Verdict::reverse_disparity);
  CHECK(decide({comp(0.99, 0.01), comp(0.01, 0.99)}, 0.05) == Verdict::violation);
  CHECK(decide({comp(0.03, std::nullopt), comp(0.04, 0.96)}, 0.025) == Verdict::no_violation);
}

TEST_CASE("joint metrics never flag unless a component clears alpha / 2") {
  Rng rng(9);
  for (int rep = 0; rep < 100; ++rep) {
    AuditInputs in;
    in.distributions = distributions_from(
        {{Statistic::tpr, {testutil::random_sample(rng, 10, 0.6, 0.05),
                           testutil::random_sample(rng, 10, 0.62, 0.05)}},
         {Statistic::fpr, {testutil::random_sample(rng, 10, 0.3, 0.05),
                           testutil::random_sample(rng, 10, 0.32, 0.05)}}});
    const auto v = evaluate_metric(find_metric("equalized_odds"), in, 0.05);
    bool any = false;
    for (const auto& c : v.components) any |= c.violation_p < 0.025;
    CHECK((v.verdict == Verdict::violation) == any);
  }
}

TEST_CASE("insufficient samples make a metric not evaluable") {
  AuditInputs in = inputs_for(Statistic::ppv, {0.5}, {0.4, 0.5});
  in.distributions->samples[Statistic::ppv].insufficient = "ppv is defined in 1 protected fold";
  const auto v = evaluate_metric(find_metric("predictive_parity"), in);
  CHECK(v.verdict == Verdict::not_evaluable);
  CHECK(v.reason.has_value());

  const auto all = evaluate_all(AuditInputs{});
  CHECK(all.size() == 14);
  for (const auto& m : all) CHECK(m.verdict == Verdict::not_evaluable);
}

TEST_CASE("mid-p direction per group") {
  AuditInputs in;
  GroupTables t;
  t.protected_table.n10 = 40;  // protected rows improve once treated as unprotected
  t.protected_table.n01 = 5;
  t.unprotected_table.n01 = 3;
  t.unprotected_table.n10 = 3;
  in.causal = t;
  auto v = evaluate_metric(find_metric("causal_discrimination"), in);
  CHECK(v.alpha == 0.025);
  CHECK(v.verdict == Verdict::violation);
  CHECK(*v.components[0].k == 5);
  CHECK(*v.components[0].n_minus_k == 40);
  CHECK(v.components[0].test.p_value == doctest::Approx(oracle::midp(5, 45)));

  std::swap(in.causal->protected_table.n01, in.causal->protected_table.n10);
  v = evaluate_metric(find_metric("causal_discrimination"), in);
  CHECK(v.verdict == Verdict::reverse_disparity);

  in.causal->protected_table = {};
  in.causal->unprotected_table.n01 = 30;  // unprotected rows lose once treated as protected
  in.causal->unprotected_table.n10 = 2;
  v = evaluate_metric(find_metric("causal_discrimination"), in);
  CHECK(v.verdict == Verdict::violation);
  CHECK(v.components[0].test.degenerate);

  AuditInputs none;
  none.awareness_unavailable = "no data";
  v = evaluate_metric(find_metric("fairness_through_awareness"), none);
  CHECK(v.verdict == Verdict::not_evaluable);
  CHECK(*v.reason == "no data");
}

TEST_CASE("chi-squared metrics read the calibration table") {
  CalibrationTable t;
  for (int i = 0; i < 4; ++i) {
    CalibrationBin b;
    b.lower = i / 4.0;
    b.upper = (i + 1) / 4.0;
    b.alpha_p = 20;
    b.theta_p = 16 - 4 * i;
    b.beta_u = 20;
    b.gamma_u = 16 - 4 * i;
    b.lambda = standardized_frequency(b.theta_p, b.alpha_p, b.beta_u);
    t.bins.push_back(b);
  }
  AuditInputs in;
  in.calibration = t;
  const auto v = evaluate_metric(find_metric("calibration"), in);
  CHECK(v.verdict == Verdict::no_violation);
  CHECK(v.components[0].test.statistic == 0.0);
  CHECK(v.components[0].test.df == 3.0);
  CHECK(v.components[0].n_protected == 80);
  CHECK_FALSE(v.components[0].opposite_p.has_value());
}

TEST_CASE("synthetic bias is flagged in the right direction") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    CHECK(audit_synth(0.6, seed).verdict == Verdict::violation);
    CHECK(audit_synth(-0.6, seed).verdict == Verdict::reverse_disparity);
  }
}

TEST_CASE("evaluate_all is deterministic and shares component results") {
  SynthConfig sc;
  sc.n = 1000;
  sc.seed = 4;
  sc.group_shift = 0.3;
  const Dataset d = generate(sc);
  const CvResult cv = run_cv(d, make_folds(d, 8, 4), {});
  AuditInputs in;
  in.distributions = collect_metric_distributions(cv.records, 8);
  const auto a = evaluate_all(in);
  const auto b = evaluate_all(in);
  REQUIRE(a.size() == 14);
  for (std::size_t i = 0; i < 14; ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].verdict == b[i].verdict);
  }
  // predictive_equality and equalized_odds share the FPR test.
  CHECK(a[2].components[0].test.statistic == a[4].components[1].test.statistic);
  CHECK(a[2].components[0].violation_p == a[4].components[1].violation_p);
}
