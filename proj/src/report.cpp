#include "fairaudit/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "fairaudit/errors.hpp"
#include "json.hpp"

namespace fairaudit {

using nlohmann::json;

namespace {

// JSON has no inf/nan; those travel as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double to_double(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
  }
  throw ParseError("expected a number, found " + j.dump(), 0);
}

json optional_number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

std::optional<double> read_optional_number(const json& obj, const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return to_double(obj.at(key));
}

std::string group_name(Group g) {
  return g == Group::protected_group ? "protected" : "unprotected";
}

Group group_from_name(const std::string& s) {
  if (s == "protected") return Group::protected_group;
  if (s == "unprotected") return Group::unprotected_group;
  throw ParseError("unknown group '" + s + "'", 0);
}

json test_to_json(const TestResult& t) {
  return {{"statistic", number(t.statistic)}, {"df", number(t.df)},
          {"tail", std::string(to_string(t.tail))}, {"p_value", number(t.p_value)},
          {"alpha", number(t.alpha)}, {"degenerate", t.degenerate}};
}

TestResult test_from_json(const json& j) {
  TestResult t;
  t.statistic = to_double(j.at("statistic"));
  t.df = to_double(j.at("df"));
  t.tail = tail_from_string(j.at("tail").get<std::string>());
  t.p_value = to_double(j.at("p_value"));
  t.alpha = to_double(j.at("alpha"));
  t.degenerate = j.at("degenerate").get<bool>();
  return t;
}

json component_to_json(const ComponentResult& c) {
  json j = {{"name", c.name},
            {"tail", std::string(to_string(c.tail))},
            {"disparity", optional_number(c.disparity)},
            {"test", test_to_json(c.test)},
            {"violation_p", number(c.violation_p)},
            {"opposite_p", optional_number(c.opposite_p)},
            {"n_protected", c.n_protected},
            {"n_unprotected", c.n_unprotected}};
  j["statistic"] = c.statistic ? json(std::string(to_string(*c.statistic))) : json(nullptr);
  j["group"] = c.group ? json(group_name(*c.group)) : json(nullptr);
  j["k"] = c.k ? json(*c.k) : json(nullptr);
  j["n_minus_k"] = c.n_minus_k ? json(*c.n_minus_k) : json(nullptr);
  return j;
}

ComponentResult component_from_json(const json& j) {
  ComponentResult c;
  c.name = j.at("name").get<std::string>();
  c.tail = tail_from_string(j.at("tail").get<std::string>());
  c.disparity = read_optional_number(j, "disparity");
  c.test = test_from_json(j.at("test"));
  c.violation_p = to_double(j.at("violation_p"));
  c.opposite_p = read_optional_number(j, "opposite_p");
  c.n_protected = j.at("n_protected").get<std::size_t>();
  c.n_unprotected = j.at("n_unprotected").get<std::size_t>();
  if (!j.at("statistic").is_null()) {
    const auto name = j.at("statistic").get<std::string>();
    c.statistic = statistic_from_string(name);
    if (!c.statistic) throw ParseError("unknown statistic '" + name + "'", 0);
  }
  if (!j.at("group").is_null()) c.group = group_from_name(j.at("group").get<std::string>());
  if (!j.at("k").is_null()) c.k = j.at("k").get<long>();
  if (!j.at("n_minus_k").is_null()) c.n_minus_k = j.at("n_minus_k").get<long>();
  return c;
}

json verdict_to_json(const MetricVerdict& v) {
  json comps = json::array();
  for (const auto& c : v.components) comps.push_back(component_to_json(c));
  return {{"id", v.id},
          {"verdict", std::string(to_string(v.verdict))},
          {"alpha", number(v.alpha)},
          {"components", comps},
          {"reason", v.reason ? json(*v.reason) : json(nullptr)}};
}

MetricVerdict verdict_from_json(const json& j) {
  MetricVerdict v;
  v.id = j.at("id").get<std::string>();
  v.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  v.alpha = to_double(j.at("alpha"));
  for (const auto& c : j.at("components")) v.components.push_back(component_from_json(c));
  if (!j.at("reason").is_null()) v.reason = j.at("reason").get<std::string>();
  return v;
}

json numbers(const std::vector<double>& xs) {
  json a = json::array();
  for (double x : xs) a.push_back(number(x));
  return a;
}

std::vector<double> read_numbers(const json& a) {
  std::vector<double> out;
  for (const auto& x : a) out.push_back(to_double(x));
  return out;
}

json samples_to_json(const StatisticSamples& s) {
  return {{"protected", numbers(s.protected_sample)},
          {"unprotected", numbers(s.unprotected_sample)},
          {"protected_folds", s.protected_folds},
          {"unprotected_folds", s.unprotected_folds},
          {"insufficient", s.insufficient ? json(*s.insufficient) : json(nullptr)}};
}

StatisticSamples samples_from_json(const json& j) {
  StatisticSamples s;
  s.protected_sample = read_numbers(j.at("protected"));
  s.unprotected_sample = read_numbers(j.at("unprotected"));
  s.protected_folds = j.at("protected_folds").get<std::vector<int>>();
  s.unprotected_folds = j.at("unprotected_folds").get<std::vector<int>>();
  if (!j.at("insufficient").is_null()) s.insufficient = j.at("insufficient").get<std::string>();
  return s;
}

json calibration_to_json(const CalibrationTable& t) {
  json bins = json::array();
  for (const auto& b : t.bins) {
    bins.push_back({{"lower", number(b.lower)},
                    {"upper", number(b.upper)},
                    {"alpha_p", b.alpha_p},
                    {"theta_p", b.theta_p},
                    {"beta_u", b.beta_u},
                    {"gamma_u", b.gamma_u},
                    {"lambda", optional_number(b.lambda)}});
  }
  return bins;
}

CalibrationTable calibration_from_json(const json& j) {
  CalibrationTable t;
  for (const auto& b : j) {
    CalibrationBin bin;
    bin.lower = to_double(b.at("lower"));
    bin.upper = to_double(b.at("upper"));
    bin.alpha_p = b.at("alpha_p").get<long>();
    bin.theta_p = b.at("theta_p").get<long>();
    bin.beta_u = b.at("beta_u").get<long>();
    bin.gamma_u = b.at("gamma_u").get<long>();
    bin.lambda = read_optional_number(b, "lambda");
    t.bins.push_back(bin);
  }
  return t;
}

json table_to_json(const ContingencyTable2x2& t) {
  return {{"n00", t.n00}, {"n01", t.n01}, {"n10", t.n10}, {"n11", t.n11},
          {"row_label", t.row_label}, {"col_label", t.col_label}};
}

ContingencyTable2x2 table_from_json(const json& j) {
  ContingencyTable2x2 t;
  t.n00 = j.at("n00").get<long>();
  t.n01 = j.at("n01").get<long>();
  t.n10 = j.at("n10").get<long>();
  t.n11 = j.at("n11").get<long>();
  t.row_label = j.at("row_label").get<std::string>();
  t.col_label = j.at("col_label").get<std::string>();
  return t;
}

json group_tables_to_json(const std::optional<GroupTables>& t) {
  if (!t) return nullptr;
  return {{"protected", table_to_json(t->protected_table)},
          {"unprotected", table_to_json(t->unprotected_table)}};
}

std::optional<GroupTables> group_tables_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return GroupTables{table_from_json(j.at("protected")), table_from_json(j.at("unprotected"))};
}

json config_to_json(const RunConfig& c) {
  return {{"k", c.k},
          {"alpha", number(c.alpha)},
          {"bins", c.bins},
          {"seed", c.seed},
          {"threshold", number(c.threshold)},
          {"include_group", c.include_group},
          {"stratified", c.stratified},
          {"learning_rate", number(c.learning_rate)},
          {"iterations", c.iterations},
          {"l2", number(c.l2)},
          {"source", c.source},
          {"data_path", c.data_path},
          {"predictions_path", c.predictions_path}};
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  c.k = j.at("k").get<int>();
  c.alpha = to_double(j.at("alpha"));
  c.bins = j.at("bins").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.threshold = to_double(j.at("threshold"));
  c.include_group = j.at("include_group").get<bool>();
  c.stratified = j.at("stratified").get<bool>();
  c.learning_rate = to_double(j.at("learning_rate"));
  c.iterations = j.at("iterations").get<int>();
  c.l2 = to_double(j.at("l2"));
  c.source = j.at("source").get<std::string>();
  c.data_path = j.at("data_path").get<std::string>();
  c.predictions_path = j.at("predictions_path").get<std::string>();
  return c;
}

const std::set<std::string>& known_top_level_keys() {
  static const std::set<std::string> keys = {
      "schema_version", "tool_version", "timestamp",      "config",
      "conventions",    "model_id",     "protected_label", "unprotected_label",
      "rows",           "dropped_rows", "mean_fold_accuracy", "verdicts",
      "samples",        "calibration",  "calibration_notes",  "causal_tables",
      "awareness_tables"};
  return keys;
}

std::string fixed(double v, int decimals) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string metric_title(const std::string& id) {
  for (const auto& spec : registry()) {
    if (spec.id == id) return spec.title;
  }
  return id;
}

void render_table(std::ostringstream& out, const ContingencyTable2x2& t,
                  const std::string& caption) {
  out << "\n" << caption << "\n\n"
      << "| " << t.row_label << " \\ " << t.col_label << " | 0 | 1 |\n"
      << "|---|---|---|\n"
      << "| 0 | " << t.n00 << " | " << t.n01 << " |\n"
      << "| 1 | " << t.n10 << " | " << t.n11 << " |\n";
}

std::string render_markdown(const AuditReport& r) {
  std::ostringstream out;
  out << "# Fairness audit report\n\n"
      << "- model: `" << r.model_id << "`\n"
      << "- groups: protected = `" << r.protected_label << "`, unprotected = `"
      << r.unprotected_label << "`\n"
      << "- rows audited: " << r.rows << " (dropped: " << r.dropped_rows << ")\n"
      << "- folds: " << r.config.k << ", alpha: " << fixed(r.config.alpha, 4)
      << ", bins: " << r.config.bins << ", seed: " << r.config.seed
      << ", threshold: " << fixed(r.config.threshold, 4) << "\n";
  if (r.mean_fold_accuracy) {
    out << "- mean fold accuracy: " << fixed(*r.mean_fold_accuracy, 4) << "\n";
  }
  out << "- generated: " << r.timestamp << " (tool " << r.tool_version << ", schema "
      << r.schema_version << ")\n";
  out << "\n## Conventions\n\n";
  for (const auto& [key, value] : r.conventions) out << "- " << key << ": " << value << "\n";

  int index = 0;
  for (const auto& v : r.verdicts) {
    ++index;
    out << "\n## " << index << ". " << metric_title(v.id) << " (`" << v.id << "`)\n\n"
        << "Verdict: **" << to_string(v.verdict) << "** at alpha = " << fixed(v.alpha, 4)
        << "\n";
    if (v.reason) out << "\nReason: " << *v.reason << "\n";
    if (v.components.empty()) continue;
    out << "\n| Component | Tail | Disparity | Test Statistic | df | P-Value | Opposite-tail P-Value |\n"
        << "|---|---|---|---|---|---|---|\n";
    for (const auto& c : v.components) {
      out << "| " << c.name << " | " << to_string(c.tail) << " | "
          << (c.disparity ? fixed(*c.disparity, 4) : "-") << " | "
          << fixed(c.test.statistic, 4) << " | " << fixed(c.test.df, 2) << " | "
          << format_p_value(c.violation_p) << " | "
          << (c.opposite_p ? format_p_value(*c.opposite_p) : "-") << " |\n";
    }
    if (v.id == "causal_discrimination" && r.causal_tables) {
      render_table(out, r.causal_tables->unprotected_table, "Original vs. counterfactual, unprotected group:");
      render_table(out, r.causal_tables->protected_table, "Original vs. counterfactual, protected group:");
    }
    if (v.id == "fairness_through_awareness" && r.awareness_tables) {
      render_table(out, r.awareness_tables->unprotected_table, "Original vs. neighbor, unprotected group:");
      render_table(out, r.awareness_tables->protected_table, "Original vs. neighbor, protected group:");
    }
    if ((v.id == "calibration" || v.id == "well_calibration") && r.calibration &&
        v.id == "calibration") {
      out << "\n| Bin | alpha_p | theta_p | beta_u | gamma_u | lambda |\n"
          << "|---|---|---|---|---|---|\n";
      for (const auto& b : r.calibration->bins) {
        out << "| [" << fixed(b.lower, 2) << ", " << fixed(b.upper, 2) << ") | " << b.alpha_p
            << " | " << b.theta_p << " | " << b.beta_u << " | " << b.gamma_u << " | "
            << (b.lambda ? fixed(*b.lambda, 4) : "-") << " |\n";
      }
      for (const auto& note : r.calibration_notes) out << "\n- " << note;
      if (!r.calibration_notes.empty()) out << "\n";
    }
  }
  return out.str();
}

}  // namespace

std::map<std::string, std::string> default_conventions() {
  return {
      {"disparity", "mean(unprotected sample) - mean(protected sample)"},
      {"outcome_coding", "0 = favorable, 1 = unfavorable; positive prediction means favorable"},
      {"score", "predicted probability of the unfavorable outcome"},
      {"t_test", "Welch two-sample t-test, statistic sign follows the disparity"},
      {"fold_statistics", "per-fold statistics with a zero denominator are omitted from samples"},
      {"fn_fp_ratio", "false negatives / false positives under the favorable coding"},
      {"calibration_df", "usable bins - 1; bins with no protected rows or no favorable unprotected "
                         "outcomes are excluded"},
      {"well_calibration_df", "2 * usable bins - 1"},
      {"well_calibration_edge_rule",
       "expected favorable rate is the observed rate projected onto the bin's favorable-rate "
       "interval [1 - upper, 1 - lower] (nearest edge by absolute difference when outside)"},
      {"midp", "k = n01 (original favorable, comparator unfavorable); two-sided mid-p on "
               "min(k, n-k)"},
      {"midp_direction", "protected rows: n10 > n01 counts against the protected group; "
                         "unprotected rows: n01 > n10 does"},
      {"matching", "Mahalanobis distance on dataset features (group and outcome excluded), "
                   "pooled covariance, with replacement, ties to the smaller row_id"},
      {"counterfactual_model", "each row is scored by the model of the fold that held it out"},
      {"bonferroni", "joint metrics test each component at alpha / component count"},
  };
}

std::string to_json_text(const AuditReport& r) {
  json j;
  j["schema_version"] = r.schema_version;
  j["tool_version"] = r.tool_version;
  j["timestamp"] = r.timestamp;
  j["config"] = config_to_json(r.config);
  j["conventions"] = r.conventions;
  j["model_id"] = r.model_id;
  j["protected_label"] = r.protected_label;
  j["unprotected_label"] = r.unprotected_label;
  j["rows"] = r.rows;
  j["dropped_rows"] = r.dropped_rows;
  j["mean_fold_accuracy"] = optional_number(r.mean_fold_accuracy);
  json verdicts = json::array();
  for (const auto& v : r.verdicts) verdicts.push_back(verdict_to_json(v));
  j["verdicts"] = verdicts;
  json samples = json::object();
  for (const auto& [stat, s] : r.samples) samples[std::string(to_string(stat))] = samples_to_json(s);
  j["samples"] = samples;
  j["calibration"] = r.calibration ? calibration_to_json(*r.calibration) : json(nullptr);
  j["calibration_notes"] = r.calibration_notes;
  j["causal_tables"] = group_tables_to_json(r.causal_tables);
  j["awareness_tables"] = group_tables_to_json(r.awareness_tables);
  return j.dump(2) + "\n";
}

ParsedReport parse_report(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("report is not valid JSON: ") + e.what(), 0);
  }
  ParsedReport out;
  AuditReport& r = out.report;
  try {
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version > kReportSchemaVersion) {
      throw ParseError("report schema version " + std::to_string(r.schema_version) +
                           " is newer than supported version " +
                           std::to_string(kReportSchemaVersion),
                       0);
    }
    for (const auto& [key, value] : j.items()) {
      if (!known_top_level_keys().contains(key)) {
        out.warnings.push_back("ignoring unknown report field '" + key + "'");
      }
    }
    r.tool_version = j.at("tool_version").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::string>();
    r.config = config_from_json(j.at("config"));
    r.conventions = j.at("conventions").get<std::map<std::string, std::string>>();
    r.model_id = j.at("model_id").get<std::string>();
    r.protected_label = j.at("protected_label").get<std::string>();
    r.unprotected_label = j.at("unprotected_label").get<std::string>();
    r.rows = j.at("rows").get<std::size_t>();
    r.dropped_rows = j.at("dropped_rows").get<std::size_t>();
    r.mean_fold_accuracy = read_optional_number(j, "mean_fold_accuracy");
    for (const auto& v : j.at("verdicts")) r.verdicts.push_back(verdict_from_json(v));
    for (const auto& [name, s] : j.at("samples").items()) {
      const auto stat = statistic_from_string(name);
      if (!stat) {
        out.warnings.push_back("ignoring samples for unknown statistic '" + name + "'");
        continue;
      }
      r.samples.emplace(*stat, samples_from_json(s));
    }
    if (!j.at("calibration").is_null()) r.calibration = calibration_from_json(j.at("calibration"));
    r.calibration_notes = j.at("calibration_notes").get<std::vector<std::string>>();
    r.causal_tables = group_tables_from_json(j.at("causal_tables"));
    r.awareness_tables = group_tables_from_json(j.at("awareness_tables"));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what(), 0);
  }
  return out;
}

void write_json(const AuditReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write report " + path.string());
  out << to_json_text(report);
  if (!out) throw InputError("failed writing report " + path.string());
}

ParsedReport read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read report " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_report(buffer.str());
}

std::string render_report(const AuditReport& report, ReportFormat format) {
  return format == ReportFormat::json ? to_json_text(report) : render_markdown(report);
}

std::string format_p_value(double p) {
  if (p < 1e-4) return "<1e-4";
  return fixed(p, 4);
}

}  // namespace fairaudit
