#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "fairaudit/data.hpp"
#include "fairaudit/errors.hpp"
#include "fairaudit/rng.hpp"
#include "oracles.hpp"

using namespace fairaudit;
namespace fs = std::filesystem;

namespace {

Schema basic_schema() {
  Schema s;
  s.outcome_column = "y";
  s.group_column = "race";
  s.id_column = "id";
  s.groups = {"B", "W"};
  s.feature_columns = {{"age", FeatureKind::numeric}};
  return s;
}

}  // namespace

TEST_CASE("rows with an undeclared group are dropped and counted") {
  const auto dir = testutil::scratch_dir("data_drop");
  testutil::write_file(dir / "d.csv",
                       "id,age,race,y\n1,30,B,0\n2,40,W,1\n3,50,Other,0\n4,20,W,0\n");
  const LoadResult r = load_dataset(dir / "d.csv", basic_schema());
  CHECK(r.dataset.size() == 3);
  CHECK(r.dropped() == 1);
  CHECK(r.dropped_unknown_value == 1);
  CHECK(r.dataset.count(Group::protected_group) + r.dataset.count(Group::unprotected_group) +
            r.dropped() ==
        r.raw_rows);
}

TEST_CASE("missing outcome column is a schema error naming it") {
  const auto dir = testutil::scratch_dir("data_missing");
  testutil::write_file(dir / "d.csv", "id,age,race\n1,30,B\n");
  try {
    load_dataset(dir / "d.csv", basic_schema());
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("'y'") != std::string::npos);
  }
}

TEST_CASE("categorical column with 3 levels becomes 3 indicators") {
  const auto dir = testutil::scratch_dir("data_onehot");
  testutil::write_file(dir / "d.csv",
                       "id,age,county,race,y\n"
                       "1,30,north,B,0\n2,40,south,W,1\n3,50,east,B,1\n"
                       "4,20,north,W,0\n5,33,east,B,0\n6,41,south,W,1\n");
  Schema s = basic_schema();
  s.feature_columns.push_back({"county", FeatureKind::categorical});
  const Dataset d = load_dataset(dir / "d.csv", s).dataset;
  REQUIRE(d.dim() == 4);
  CHECK(d.feature_names() ==
        std::vector<std::string>{"age", "county=east", "county=north", "county=south"});
  // Hand encoding of the six rows.
  const double expected[6][3] = {{0, 1, 0}, {0, 0, 1}, {1, 0, 0}, {0, 1, 0}, {1, 0, 0}, {0, 0, 1}};
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(d.features()(i, j + 1) == expected[i][j]);
    CHECK(d.features().row(i).tail(3).sum() == 1.0);
  }
}

TEST_CASE("non-numeric value is a parse error with the line number") {
  const auto dir = testutil::scratch_dir("data_parse");
  testutil::write_file(dir / "d.csv", "id,age,race,y\n1,30,B,0\n2,old,W,1\n");
  try {
    load_dataset(dir / "d.csv", basic_schema());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("empty group and duplicate ids are rejected") {
  const auto dir = testutil::scratch_dir("data_empty");
  testutil::write_file(dir / "a.csv", "id,age,race,y\n1,30,W,0\n2,40,W,1\n");
  CHECK_THROWS_AS(load_dataset(dir / "a.csv", basic_schema()), EmptyGroupError);
  testutil::write_file(dir / "b.csv", "id,age,race,y\n1,30,W,0\n1,40,B,1\n");
  CHECK_THROWS_AS(load_dataset(dir / "b.csv", basic_schema()), InputError);
}

TEST_CASE("missing numeric cells drop the row") {
  const auto dir = testutil::scratch_dir("data_na");
  testutil::write_file(dir / "d.csv", "id,age,race,y\n1,,B,0\n2,40,W,1\n3,NA,W,0\n4,22,B,1\n");
  const LoadResult r = load_dataset(dir / "d.csv", basic_schema());
  CHECK(r.dataset.size() == 2);
  CHECK(r.dropped_missing == 2);
}

TEST_CASE("favorable value maps to 0 whatever its raw spelling") {
  const auto dir = testutil::scratch_dir("data_coding");
  testutil::write_file(dir / "d.csv", "id,age,race,y\n1,30,B,yes\n2,40,W,no\n");
  Schema s = basic_schema();
  s.favorable_outcome = "no";
  s.unfavorable_outcome = "yes";
  const Dataset d = load_dataset(dir / "d.csv", s).dataset;
  CHECK(d.outcomes() == std::vector<int>{1, 0});
}

TEST_CASE("loading twice gives identical datasets") {
  const auto dir = testutil::scratch_dir("data_twice");
  testutil::write_file(dir / "d.csv", "id,age,race,y\n1,30.25,B,0\n2,40,W,1\n3,\"41\",W,0\n");
  CHECK(load_dataset(dir / "d.csv", basic_schema()).dataset ==
        load_dataset(dir / "d.csv", basic_schema()).dataset);
}

TEST_CASE("validate_schema reports every violation") {
  const Schema s = basic_schema();
  CHECK(validate_schema(s, {"id", "age", "race", "y"}).empty());
  CHECK(validate_schema(s, {"id", "age", "rase", "y"}).size() == 1);
  CHECK(validate_schema(s, {"id", "age"}).size() == 2);
}

TEST_CASE("schema files round-trip") {
  const auto dir = testutil::scratch_dir("schema_rt");
  Schema s = basic_schema();
  s.feature_columns.push_back({"county", FeatureKind::categorical});
  write_schema(s, dir / "s.toml");
  const Schema back = load_schema(dir / "s.toml");
  CHECK(back.outcome_column == "y");
  CHECK(back.group_column == "race");
  CHECK(back.groups.protected_label == "B");
  REQUIRE(back.feature_columns.size() == 2);
  CHECK(back.feature_columns[1].kind == FeatureKind::categorical);
}

TEST_CASE("split_by_group partitions in row order") {
  using G = Group;
  const auto d = testutil::make_dataset(
      {{1}, {2}, {3}, {4}, {5}}, {0, 1, 0, 1, 0},
      {G::protected_group, G::unprotected_group, G::protected_group, G::unprotected_group,
       G::unprotected_group});
  const GroupSplit s = split_by_group(d);
  CHECK(s.protected_rows == std::vector<std::size_t>{0, 2});
  CHECK(s.unprotected_rows == std::vector<std::size_t>{1, 3, 4});

  const auto all = testutil::make_dataset({{1}, {2}}, {0, 1},
                                          {G::protected_group, G::protected_group});
  CHECK(split_by_group(all).protected_rows.size() == 2);
  CHECK(split_by_group(all).unprotected_rows.empty());
}

TEST_CASE("split_by_group matches a direct filter on shuffled rows") {
  Rng rng(5);
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  std::vector<Group> g;
  for (int i = 0; i < 20; ++i) {
    rows.push_back({rng.normal()});
    y.push_back(static_cast<int>(rng.below(2)));
    g.push_back(rng.bernoulli(0.4) ? Group::protected_group : Group::unprotected_group);
  }
  const Dataset d = testutil::make_dataset(rows, y, g);
  std::vector<std::size_t> order(20);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));
  const Dataset shuffled = d.subset(order);

  auto ids_of = [](const Dataset& ds, const std::vector<std::size_t>& idx) {
    std::vector<RowId> out;
    for (auto i : idx) out.push_back(ds.row_ids()[i]);
    std::sort(out.begin(), out.end());
    return out;
  };
  std::vector<RowId> direct;
  for (int i = 0; i < 20; ++i) {
    if (g[i] == Group::protected_group) direct.push_back(i);
  }
  CHECK(ids_of(shuffled, split_by_group(shuffled).protected_rows) == direct);
  CHECK(ids_of(d, split_by_group(d).protected_rows) == direct);
}

TEST_CASE("csv splitting honors quotes") {
  CHECK(split_csv_line("a,\"b,c\",\"d\"\"e\",") ==
        std::vector<std::string>{"a", "b,c", "d\"e", ""});
}

TEST_CASE("written synthetic csv loads back identically") {
  const auto dir = testutil::scratch_dir("data_rt");
  using G = Group;
  const auto d = testutil::make_dataset({{0.1, 2}, {0.2, 3}, {-1.5, 4}}, {0, 1, 1},
                                        {G::protected_group, G::unprotected_group,
                                         G::protected_group},
                                        {10, 11, 12});
  Schema s;
  s.outcome_column = "outcome";
  s.group_column = "group";
  s.id_column = "row_id";
  s.feature_columns = {{"f0", FeatureKind::numeric}, {"f1", FeatureKind::numeric}};
  write_dataset_csv(d, s, dir / "d.csv");
  CHECK(load_dataset(dir / "d.csv", s).dataset == d);
}
