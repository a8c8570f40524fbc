#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fairaudit/config.hpp"

namespace fairaudit {

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowId = std::int64_t;

enum class Group : std::uint8_t { protected_group = 0, unprotected_group = 1 };

inline Group other(Group g) {
  return g == Group::protected_group ? Group::unprotected_group : Group::protected_group;
}

// Outcomes and predicted labels are stored with 0 = favorable and
// 1 = unfavorable whatever the raw values in the input file were.
inline constexpr int kFavorable = 0;
inline constexpr int kUnfavorable = 1;

enum class FeatureKind { numeric, categorical };

struct FeatureColumn {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
};

struct GroupLabels {
  std::string protected_label = "protected";
  std::string unprotected_label = "unprotected";

  const std::string& label(Group g) const {
    return g == Group::protected_group ? protected_label : unprotected_label;
  }
  // Throws ParseError (with `line`) for labels that are neither.
  Group parse(const std::string& text, long line) const;
};

struct Schema {
  std::vector<FeatureColumn> feature_columns;
  std::string outcome_column;
  std::string group_column;
  // Optional integer id column; rows are numbered from 0 when absent.
  std::string id_column;
  std::string favorable_outcome = "0";
  std::string unfavorable_outcome = "1";
  GroupLabels groups;
};

// Builds a schema from the keys outcome, group, id, favorable, unfavorable,
// protected, unprotected, numeric, categorical.
Schema schema_from_config(const ConfigTable& table);
Schema load_schema(const std::filesystem::path& path);
void write_schema(const Schema& schema, const std::filesystem::path& path);

// Every problem with `header` under `schema`; empty means valid.
std::vector<std::string> validate_schema(const Schema& schema,
                                         const std::vector<std::string>& header);

// Immutable encoded dataset. Row i has id row_ids()[i], encoded features
// row i of features(), outcome in {0 favorable, 1 unfavorable} and a group.
class Dataset {
 public:
  Dataset(std::vector<RowId> row_ids, FeatureMatrix features,
          std::vector<std::string> feature_names, std::vector<int> outcomes,
          std::vector<Group> groups, GroupLabels labels = {});

  std::size_t size() const { return row_ids_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features_.cols()); }

  const std::vector<RowId>& row_ids() const { return row_ids_; }
  const FeatureMatrix& features() const { return features_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<int>& outcomes() const { return outcomes_; }
  const std::vector<Group>& groups() const { return groups_; }
  const GroupLabels& labels() const { return labels_; }

  std::size_t count(Group g) const;

  // New dataset holding rows `indices` in the given order.
  Dataset subset(const std::vector<std::size_t>& indices) const;
  Dataset with_outcomes(std::vector<int> outcomes) const;
  Dataset with_groups(std::vector<Group> groups) const;

  bool operator==(const Dataset& other) const;

 private:
  std::vector<RowId> row_ids_;
  FeatureMatrix features_;
  std::vector<std::string> feature_names_;
  std::vector<int> outcomes_;
  std::vector<Group> groups_;
  GroupLabels labels_;
};

struct LoadResult {
  Dataset dataset;
  std::size_t raw_rows = 0;
  // Rows whose outcome or group was outside the declared values.
  std::size_t dropped_unknown_value = 0;
  // Rows with an empty or NA cell in a feature column.
  std::size_t dropped_missing = 0;

  std::size_t dropped() const { return dropped_unknown_value + dropped_missing; }
};

LoadResult load_dataset(const std::filesystem::path& path, const Schema& schema);

// Writes a numeric-feature dataset back in the delimited format `schema`
// describes. Used to feed generated data through the normal loader.
void write_dataset_csv(const Dataset& dataset, const Schema& schema,
                       const std::filesystem::path& path);

// Row indices of each group, in dataset order.
struct GroupSplit {
  std::vector<std::size_t> protected_rows;
  std::vector<std::size_t> unprotected_rows;
};

GroupSplit split_by_group(const Dataset& dataset);

// Splits one delimited line; double quotes protect commas and "" escapes a quote.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace fairaudit
