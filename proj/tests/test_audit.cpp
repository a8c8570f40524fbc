#include <cmath>

#include "doctest.h"
#include "fairaudit/audit.hpp"
#include "fairaudit/errors.hpp"
#include "fairaudit/synth.hpp"
#include "oracles.hpp"

using namespace fairaudit;

namespace {

Dataset population(std::uint64_t seed, double shift = 0.5, std::size_t n = 900) {
  SynthConfig sc;
  sc.n = n;
  sc.seed = seed;
  sc.group_shift = shift;
  return generate(sc);
}

AuditConfig small_config(std::uint64_t seed) {
  AuditConfig cfg;
  cfg.k = 6;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("every reported number is recomputable from the stored samples and tables") {
  const Dataset d = population(11);
  const AuditReport r = audit_dataset(d, d.labels(), small_config(11));
  REQUIRE(r.verdicts.size() == 14);
  for (const auto& v : r.verdicts) {
    for (const auto& c : v.components) {
      if (c.statistic) {
        const auto& s = r.samples.at(*c.statistic);
        const auto o = oracle::welch(s.unprotected_sample, s.protected_sample, c.tail);
        CHECK(c.test.statistic == doctest::Approx(o.t).epsilon(1e-10));
        CHECK(std::fabs(c.violation_p - o.p) < 1e-9);
        double mp = 0, mu = 0;
        for (double x : s.protected_sample) mp += x;
        for (double x : s.unprotected_sample) mu += x;
        CHECK(*c.disparity == doctest::Approx(mu / s.unprotected_sample.size() -
                                              mp / s.protected_sample.size()));
        CHECK(c.n_protected == s.protected_sample.size());
      }
      if (c.k) {
        const auto& tables = v.id == "causal_discrimination" ? r.causal_tables : r.awareness_tables;
        REQUIRE(tables.has_value());
        const auto& t = tables->of(*c.group);
        CHECK(*c.k == t.n01);
        CHECK(c.test.p_value == doctest::Approx(oracle::midp(t.n01, t.discordant())));
      }
    }
    if (v.id == "calibration") {
      double stat = 0;
      int usable = 0;
      for (const auto& b : r.calibration->bins) {
        if (b.alpha_p == 0 || b.gamma_u == 0) continue;
        const double lambda = static_cast<double>(b.theta_p) / b.alpha_p * b.beta_u;
        stat += (lambda - b.gamma_u) * (lambda - b.gamma_u) / b.gamma_u;
        ++usable;
      }
      CHECK(v.components[0].test.statistic == doctest::Approx(stat));
      CHECK(v.components[0].test.p_value == doctest::Approx(oracle::chi2_sf(stat, usable - 1)));
    }
  }
}

TEST_CASE("audits are deterministic apart from the timestamp") {
  const Dataset d = population(12);
  AuditReport a = audit_dataset(d, d.labels(), small_config(12));
  AuditReport b = audit_dataset(d, d.labels(), small_config(12));
  a.timestamp = b.timestamp = "";
  CHECK(to_json_text(a) == to_json_text(b));
}

TEST_CASE("excluding the group feature leaves the causal test not evaluable") {
  const Dataset d = population(13);
  AuditConfig cfg = small_config(13);
  cfg.include_group = false;
  const AuditReport r = audit_dataset(d, d.labels(), cfg);
  CHECK(r.verdicts[12].id == "causal_discrimination");
  CHECK(r.verdicts[12].verdict == Verdict::not_evaluable);
  CHECK(r.verdicts[12].reason->find("--exclude-race") != std::string::npos);
  CHECK_FALSE(r.causal_tables.has_value());
  CHECK(r.awareness_tables.has_value());
  CHECK_FALSE(r.config.include_group);
}

TEST_CASE("external predictions are audited without training") {
  const Dataset d = population(14);
  const auto dir = testutil::scratch_dir("audit_ext");
  const AuditReport internal = audit_dataset(d, d.labels(), small_config(14));

  // Re-audit the internal model's own predictions through the file interface.
  const FoldPlan plan = make_folds(d, 6, 14);
  CvConfig cv_cfg;
  cv_cfg.params.seed = 14;
  const CvResult cv = run_cv(d, plan, cv_cfg);
  write_predictions(cv.records, d.labels(), dir / "p.csv");
  auto records = load_external_predictions(dir / "p.csv", d.labels());

  const AuditReport without_data = audit_predictions(records, d.labels(), nullptr, small_config(14));
  CHECK(without_data.config.source == "predictions");
  CHECK(without_data.verdicts[12].verdict == Verdict::not_evaluable);
  CHECK(without_data.verdicts[13].verdict == Verdict::not_evaluable);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(without_data.verdicts[i].verdict == internal.verdicts[i].verdict);
  }
  const AuditReport with_data = audit_predictions(records, d.labels(), &d, small_config(14));
  CHECK(with_data.awareness_tables == internal.awareness_tables);
}

TEST_CASE("mean fold accuracy") {
  std::vector<PredictionRecord> r = {{1, 0, 0, 0, 0.1, Group::protected_group},
                                     {2, 0, 1, 0, 0.4, Group::protected_group},
                                     {3, 1, 1, 1, 0.9, Group::unprotected_group}};
  CHECK(*mean_fold_accuracy(r) == doctest::Approx(0.75));
  CHECK_FALSE(mean_fold_accuracy({}).has_value());
}

TEST_CASE("run_audit input checks") {
  AuditConfig cfg;
  CHECK_THROWS_AS(run_audit(cfg), ConfigError);
  cfg.data_path = "x.csv";
  CHECK_THROWS_AS(run_audit(cfg), ConfigError);
  cfg.schema_path = "/nonexistent/schema.toml";
  CHECK_THROWS_AS(run_audit(cfg), InputError);

  const Dataset d = population(15);
  AuditConfig bad = small_config(15);
  bad.alpha = 1.5;
  CHECK_THROWS_AS(audit_dataset(d, d.labels(), bad), ConfigError);
  bad = small_config(15);
  bad.k = 1;
  CHECK_THROWS_AS(audit_dataset(d, d.labels(), bad), ConfigError);
}

TEST_CASE("utc timestamps") {
  const std::string t = utc_timestamp();
  CHECK(t.size() == 20);
  CHECK(t.back() == 'Z');
  CHECK(t[10] == 'T');
}
