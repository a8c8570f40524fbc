#include "fairaudit/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "fairaudit/errors.hpp"

namespace fairaudit {

namespace {

const std::string* find_scalar(const ConfigTable& table, const std::string& key) {
  auto it = table.find(key);
  if (it == table.end()) return nullptr;
  if (const auto* s = std::get_if<std::string>(&it->second)) return s;
  throw SchemaError("schema key '" + key + "' must be a single value");
}

std::vector<std::string> find_list(const ConfigTable& table, const std::string& key) {
  auto it = table.find(key);
  if (it == table.end()) return {};
  if (const auto* v = std::get_if<std::vector<std::string>>(&it->second)) return *v;
  return {std::get<std::string>(it->second)};
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan";
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::string quote_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += "\"" + items[i] + "\"";
  }
  return out + "]";
}

}  // namespace

Group GroupLabels::parse(const std::string& text, long line) const {
  if (text == protected_label) return Group::protected_group;
  if (text == unprotected_label) return Group::unprotected_group;
  throw ParseError("unknown group label '" + text + "'", line);
}

Schema schema_from_config(const ConfigTable& table) {
  Schema schema;
  const std::string* outcome = find_scalar(table, "outcome");
  const std::string* group = find_scalar(table, "group");
  if (!outcome) throw SchemaError("schema is missing the 'outcome' key");
  if (!group) throw SchemaError("schema is missing the 'group' key");
  schema.outcome_column = *outcome;
  schema.group_column = *group;
  if (const auto* id = find_scalar(table, "id")) schema.id_column = *id;
  if (const auto* v = find_scalar(table, "favorable")) schema.favorable_outcome = *v;
  if (const auto* v = find_scalar(table, "unfavorable")) schema.unfavorable_outcome = *v;
  if (const auto* v = find_scalar(table, "protected")) schema.groups.protected_label = *v;
  if (const auto* v = find_scalar(table, "unprotected")) schema.groups.unprotected_label = *v;
  for (const auto& name : find_list(table, "numeric")) {
    schema.feature_columns.push_back({name, FeatureKind::numeric});
  }
  for (const auto& name : find_list(table, "categorical")) {
    schema.feature_columns.push_back({name, FeatureKind::categorical});
  }
  if (schema.favorable_outcome == schema.unfavorable_outcome) {
    throw SchemaError("favorable and unfavorable outcome values must differ");
  }
  if (schema.groups.protected_label == schema.groups.unprotected_label) {
    throw SchemaError("protected and unprotected group labels must differ");
  }
  return schema;
}

Schema load_schema(const std::filesystem::path& path) {
  return schema_from_config(read_config_file(path));
}

void write_schema(const Schema& schema, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write schema file " + path.string());
  std::vector<std::string> numeric, categorical;
  for (const auto& col : schema.feature_columns) {
    (col.kind == FeatureKind::numeric ? numeric : categorical).push_back(col.name);
  }
  out << "outcome = \"" << schema.outcome_column << "\"\n"
      << "group = \"" << schema.group_column << "\"\n";
  if (!schema.id_column.empty()) out << "id = \"" << schema.id_column << "\"\n";
  out << "favorable = \"" << schema.favorable_outcome << "\"\n"
      << "unfavorable = \"" << schema.unfavorable_outcome << "\"\n"
      << "protected = \"" << schema.groups.protected_label << "\"\n"
      << "unprotected = \"" << schema.groups.unprotected_label << "\"\n"
      << "numeric = " << quote_list(numeric) << "\n";
  if (!categorical.empty()) out << "categorical = " << quote_list(categorical) << "\n";
}

std::vector<std::string> validate_schema(const Schema& schema,
                                         const std::vector<std::string>& header) {
  std::vector<std::string> violations;
  std::map<std::string, int> seen;
  for (const auto& h : header) ++seen[h];
  for (const auto& [name, count] : seen) {
    if (count > 1) violations.push_back("duplicate header column '" + name + "'");
  }
  auto require = [&](const std::string& column, const std::string& role) {
    if (column.empty()) {
      violations.push_back(role + " column is not declared");
    } else if (!seen.contains(column)) {
      violations.push_back(role + " column '" + column + "' not found in header");
    }
  };
  require(schema.outcome_column, "outcome");
  require(schema.group_column, "group");
  if (!schema.id_column.empty()) require(schema.id_column, "id");
  std::set<std::string> declared;
  for (const auto& col : schema.feature_columns) {
    require(col.name, "feature");
    if (!declared.insert(col.name).second) {
      violations.push_back("feature column '" + col.name + "' declared twice");
    }
    if (col.name == schema.outcome_column || col.name == schema.group_column) {
      violations.push_back("column '" + col.name + "' cannot be both a feature and the " +
                           (col.name == schema.outcome_column ? "outcome" : "group"));
    }
  }
  if (schema.favorable_outcome == schema.unfavorable_outcome) {
    violations.push_back("favorable and unfavorable outcome values are identical");
  }
  if (schema.groups.protected_label == schema.groups.unprotected_label) {
    violations.push_back("protected and unprotected labels are identical");
  }
  return violations;
}

Dataset::Dataset(std::vector<RowId> row_ids, FeatureMatrix features,
                 std::vector<std::string> feature_names, std::vector<int> outcomes,
                 std::vector<Group> groups, GroupLabels labels)
    : row_ids_(std::move(row_ids)),
      features_(std::move(features)),
      feature_names_(std::move(feature_names)),
      outcomes_(std::move(outcomes)),
      groups_(std::move(groups)),
      labels_(std::move(labels)) {
  const auto n = row_ids_.size();
  if (static_cast<std::size_t>(features_.rows()) != n || outcomes_.size() != n ||
      groups_.size() != n) {
    throw InputError("dataset columns have inconsistent lengths");
  }
  if (feature_names_.size() != static_cast<std::size_t>(features_.cols())) {
    throw InputError("feature name count does not match feature matrix width");
  }
  std::unordered_set<RowId> ids;
  for (RowId id : row_ids_) {
    if (!ids.insert(id).second) throw InputError("duplicate row_id " + std::to_string(id));
  }
  for (int y : outcomes_) {
    if (y != kFavorable && y != kUnfavorable) throw InputError("outcome must be 0 or 1");
  }
}

std::size_t Dataset::count(Group g) const {
  return static_cast<std::size_t>(std::count(groups_.begin(), groups_.end(), g));
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  std::vector<RowId> ids;
  std::vector<int> ys;
  std::vector<Group> gs;
  FeatureMatrix x(static_cast<Eigen::Index>(indices.size()), features_.cols());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto i = indices[k];
    ids.push_back(row_ids_[i]);
    ys.push_back(outcomes_[i]);
    gs.push_back(groups_[i]);
    x.row(static_cast<Eigen::Index>(k)) = features_.row(static_cast<Eigen::Index>(i));
  }
  return Dataset(std::move(ids), std::move(x), feature_names_, std::move(ys), std::move(gs),
                 labels_);
}

Dataset Dataset::with_outcomes(std::vector<int> outcomes) const {
  return Dataset(row_ids_, features_, feature_names_, std::move(outcomes), groups_, labels_);
}

Dataset Dataset::with_groups(std::vector<Group> groups) const {
  return Dataset(row_ids_, features_, feature_names_, outcomes_, std::move(groups), labels_);
}

bool Dataset::operator==(const Dataset& other) const {
  return row_ids_ == other.row_ids_ && feature_names_ == other.feature_names_ &&
         outcomes_ == other.outcomes_ && groups_ == other.groups_ &&
         features_.rows() == other.features_.rows() &&
         features_.cols() == other.features_.cols() && features_ == other.features_ &&
         labels_.protected_label == other.labels_.protected_label &&
         labels_.unprotected_label == other.labels_.unprotected_label;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

LoadResult load_dataset(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("data file is empty: " + path.string(), 1);
  const std::vector<std::string> header = split_csv_line(strip_cr(line));

  if (auto violations = validate_schema(schema, header); !violations.empty()) {
    std::string msg = "schema does not match " + path.string() + ":";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw SchemaError(msg);
  }
  std::map<std::string, std::size_t> column_index;
  for (std::size_t i = 0; i < header.size(); ++i) column_index[header[i]] = i;
  const std::size_t outcome_col = column_index.at(schema.outcome_column);
  const std::size_t group_col = column_index.at(schema.group_column);
  const bool has_id = !schema.id_column.empty();
  const std::size_t id_col = has_id ? column_index.at(schema.id_column) : 0;

  struct RawRow {
    RowId id;
    int outcome;
    Group group;
    std::vector<double> numeric;
    std::vector<std::string> categorical;
  };
  std::vector<RawRow> rows;
  std::size_t raw_rows = 0, dropped_unknown = 0, dropped_missing = 0;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const RowId auto_id = static_cast<RowId>(raw_rows);
    ++raw_rows;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    const std::string& y = fields[outcome_col];
    const std::string& g = fields[group_col];
    if ((y != schema.favorable_outcome && y != schema.unfavorable_outcome) ||
        (g != schema.groups.protected_label && g != schema.groups.unprotected_label)) {
      ++dropped_unknown;
      continue;
    }
    RawRow row;
    row.outcome = y == schema.favorable_outcome ? kFavorable : kUnfavorable;
    row.group = schema.groups.parse(g, line_no);
    row.id = auto_id;
    if (has_id) {
      const std::string& cell = fields[id_col];
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), row.id);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
        throw ParseError("row id '" + cell + "' is not an integer", line_no);
      }
    }
    bool missing = false;
    for (const auto& col : schema.feature_columns) {
      const std::string& cell = fields[column_index.at(col.name)];
      if (is_missing(cell)) {
        missing = true;
        break;
      }
      if (col.kind == FeatureKind::categorical) {
        row.categorical.push_back(cell);
        continue;
      }
      double value = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
        throw ParseError("non-numeric value '" + cell + "' in numeric column '" + col.name + "'",
                         line_no);
      }
      row.numeric.push_back(value);
    }
    if (missing) {
      ++dropped_missing;
      continue;
    }
    rows.push_back(std::move(row));
  }

  // Categorical levels in sorted order give a deterministic one-hot layout.
  std::vector<std::set<std::string>> levels;
  for (const auto& col : schema.feature_columns) {
    if (col.kind == FeatureKind::categorical) levels.emplace_back();
  }
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.categorical.size(); ++c) levels[c].insert(row.categorical[c]);
  }
  std::vector<std::string> names;
  {
    std::size_t cat = 0;
    for (const auto& col : schema.feature_columns) {
      if (col.kind == FeatureKind::numeric) {
        names.push_back(col.name);
      } else {
        for (const auto& level : levels[cat]) names.push_back(col.name + "=" + level);
        ++cat;
      }
    }
  }

  FeatureMatrix x = FeatureMatrix::Zero(static_cast<Eigen::Index>(rows.size()),
                                        static_cast<Eigen::Index>(names.size()));
  std::vector<RowId> ids;
  std::vector<int> outcomes;
  std::vector<Group> groups;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    Eigen::Index j = 0;
    std::size_t num = 0, cat = 0;
    for (const auto& col : schema.feature_columns) {
      if (col.kind == FeatureKind::numeric) {
        x(static_cast<Eigen::Index>(r), j++) = row.numeric[num++];
      } else {
        const auto& lv = levels[cat];
        const auto pos = std::distance(lv.begin(), lv.find(row.categorical[cat]));
        x(static_cast<Eigen::Index>(r), j + pos) = 1.0;
        j += static_cast<Eigen::Index>(lv.size());
        ++cat;
      }
    }
    ids.push_back(row.id);
    outcomes.push_back(row.outcome);
    groups.push_back(row.group);
  }

  const auto n_protected = std::count(groups.begin(), groups.end(), Group::protected_group);
  if (n_protected == 0 || n_protected == static_cast<long>(groups.size())) {
    throw EmptyGroupError("after filtering, the " +
                          std::string(n_protected == 0 ? "protected" : "unprotected") +
                          " group has no rows");
  }
  std::unordered_set<RowId> unique_ids;
  for (RowId id : ids) {
    if (!unique_ids.insert(id).second) {
      throw ParseError("duplicate row id " + std::to_string(id), 0);
    }
  }

  return LoadResult{Dataset(std::move(ids), std::move(x), std::move(names), std::move(outcomes),
                            std::move(groups), schema.groups),
                    raw_rows, dropped_unknown, dropped_missing};
}

void write_dataset_csv(const Dataset& dataset, const Schema& schema,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write data file " + path.string());
  const std::string id_name = schema.id_column.empty() ? "row_id" : schema.id_column;
  out << id_name;
  for (const auto& name : dataset.feature_names()) out << ',' << name;
  out << ',' << schema.group_column << ',' << schema.outcome_column << '\n';
  std::ostringstream cell;
  cell.precision(17);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out << dataset.row_ids()[i];
    for (Eigen::Index j = 0; j < dataset.features().cols(); ++j) {
      cell.str("");
      cell << dataset.features()(static_cast<Eigen::Index>(i), j);
      out << ',' << cell.str();
    }
    out << ',' << schema.groups.label(dataset.groups()[i]) << ','
        << (dataset.outcomes()[i] == kFavorable ? schema.favorable_outcome
                                                : schema.unfavorable_outcome)
        << '\n';
  }
}

GroupSplit split_by_group(const Dataset& dataset) {
  GroupSplit split;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (dataset.groups()[i] == Group::protected_group ? split.protected_rows
                                                   : split.unprotected_rows)
        .push_back(i);
  }
  return split;
}

}  // namespace fairaudit
