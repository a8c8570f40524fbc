#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fairaudit/errors.hpp"
#include "fairaudit/synth.hpp"
#include "oracles.hpp"

using namespace fairaudit;

namespace {

double favorable_rate(const Dataset& d, Group g) {
  double fav = 0, total = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.groups()[i] != g) continue;
    fav += d.outcomes()[i] == kFavorable;
    total += 1;
  }
  return fav / total;
}

}  // namespace

TEST_CASE("exchangeable groups have matching outcome rates") {
  SynthConfig sc;
  sc.n = 100000;
  sc.seed = 1;
  const Dataset d = generate(sc);
  CHECK(std::fabs(favorable_rate(d, Group::protected_group) -
                  favorable_rate(d, Group::unprotected_group)) < 0.02);
  CHECK(d.dim() == 5);
  CHECK(d.feature_names().front() == "x0");
}

TEST_CASE("group shift lowers the protected favorable rate") {
  SynthConfig sc;
  sc.n = 20000;
  sc.seed = 2;
  sc.group_shift = 0.5;
  const Dataset d = generate(sc);
  CHECK(favorable_rate(d, Group::unprotected_group) - favorable_rate(d, Group::protected_group) >
        0.05);
}

TEST_CASE("coin-flip relabeling of an exchangeable population changes no summary") {
  SynthConfig sc;
  sc.n = 40000;
  sc.seed = 3;
  const Dataset d = generate(sc);
  Rng rng(99);
  std::vector<Group> g;
  for (std::size_t i = 0; i < d.size(); ++i) {
    g.push_back(rng.bernoulli(0.5) ? Group::protected_group : Group::unprotected_group);
  }
  const Dataset r = d.with_groups(g);
  for (Group grp : {Group::protected_group, Group::unprotected_group}) {
    CHECK(std::fabs(favorable_rate(r, grp) - favorable_rate(d, grp)) < 0.02);
    double mean_d = 0, mean_r = 0, nd = 0, nr = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.groups()[i] == grp) { mean_d += d.features()(static_cast<Eigen::Index>(i), 0); ++nd; }
      if (r.groups()[i] == grp) { mean_r += r.features()(static_cast<Eigen::Index>(i), 0); ++nr; }
    }
    CHECK(std::fabs(mean_d / nd - mean_r / nr) < 0.04);
  }
}

TEST_CASE("generation is deterministic per seed") {
  SynthConfig sc;
  sc.n = 500;
  sc.seed = 7;
  CHECK(generate(sc) == generate(sc));
  SynthConfig other_seed = sc;
  other_seed.seed = 8;
  CHECK_FALSE(generate(sc) == generate(other_seed));

  const auto dir = testutil::scratch_dir("synth_bytes");
  const Dataset d = generate(sc);
  write_dataset_csv(d, synth_schema(d), dir / "a.csv");
  write_dataset_csv(generate(sc), synth_schema(d), dir / "b.csv");
  std::ifstream a(dir / "a.csv"), b(dir / "b.csv");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(load_dataset(dir / "a.csv", synth_schema(d)).dataset == d);
}

TEST_CASE("degenerate configurations are rejected") {
  SynthConfig sc;
  sc.n = 200;
  sc.group_mix = 0.0;
  CHECK_THROWS_AS(generate(sc), ConfigError);
  sc.group_mix = 1.0;
  CHECK_THROWS_AS(generate(sc), ConfigError);
}

TEST_CASE("bias injection") {
  SynthConfig sc;
  sc.n = 40000;
  sc.seed = 4;
  const Dataset d = generate(sc);
  CHECK(inject_bias(d, BiasMechanism::outcome_shift, 0.0, 1) == d);
  CHECK(inject_bias(d, BiasMechanism::label_noise_on_protected, 0.0, 1) == d);

  const Dataset shifted = inject_bias(d, BiasMechanism::outcome_shift, 0.2, 1);
  const double before = favorable_rate(d, Group::protected_group);
  const double after = favorable_rate(shifted, Group::protected_group);
  CHECK(std::fabs((before - after) - 0.2 * before) < 0.01);
  CHECK(favorable_rate(shifted, Group::unprotected_group) ==
        favorable_rate(d, Group::unprotected_group));

  const Dataset twice = inject_bias(inject_bias(d, BiasMechanism::outcome_shift, 0.1, 1),
                                    BiasMechanism::outcome_shift, 0.1, 2);
  CHECK_FALSE(twice == shifted);

  CHECK_THROWS_AS(bias_mechanism_from_string("teleport"), ConfigError);
  CHECK(bias_mechanism_from_string("label_noise_on_protected") ==
        BiasMechanism::label_noise_on_protected);
  CHECK_THROWS_AS(inject_bias(d, BiasMechanism::outcome_shift, 1.5, 1), ConfigError);
}
