#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "fairaudit/audit.hpp"
#include "fairaudit/errors.hpp"
#include "fairaudit/report.hpp"
#include "fairaudit/synth.hpp"

namespace fs = std::filesystem;
using namespace fairaudit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

constexpr const char* kReportDirEnv = "FAIRAUDIT_REPORT_DIR";

std::string default_out_dir() {
  const char* env = std::getenv(kReportDirEnv);
  return env != nullptr && *env != '\0' ? env : ".";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

struct RunOptions {
  AuditConfig audit;
  std::string out_dir = default_out_dir();
  bool fail_on_violation = false;
  std::string predictions_out;
};

int run(const RunOptions& opts) {
  const AuditReport report = run_audit(opts.audit);
  const fs::path dir = opts.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create report directory " + dir.string() + ": " + ec.message());
  write_json(report, dir / "report.json");
  write_text(dir / "report.md", render_report(report, ReportFormat::md));

  if (report.mean_fold_accuracy) {
    std::printf("%s: mean fold accuracy %.2f%% over %d folds (%zu rows)\n",
                report.model_id.c_str(), *report.mean_fold_accuracy * 100.0, report.config.k,
                report.rows);
  }
  int violations = 0;
  for (const auto& v : report.verdicts) {
    std::printf("  %-28s %s\n", v.id.c_str(), std::string(to_string(v.verdict)).c_str());
    violations += v.verdict == Verdict::violation ? 1 : 0;
  }
  std::printf("reports written to %s\n", dir.string().c_str());
  return opts.fail_on_violation && violations > 0 ? kExitViolation : kExitOk;
}

struct ValidateOptions {
  std::string data;
  std::string schema;
  std::string predictions;
  std::string report;
};

int validate(const ValidateOptions& opts) {
  if (opts.data.empty() && opts.predictions.empty() && opts.report.empty()) {
    throw ConfigError("give --data, --predictions or --report");
  }
  std::optional<Schema> schema;
  if (!opts.schema.empty()) schema = load_schema(opts.schema);
  if (!opts.data.empty()) {
    if (!schema) throw ConfigError("--data needs --schema");
    const LoadResult loaded = load_dataset(opts.data, *schema);
    std::printf("data: %zu rows kept of %zu (%zu unknown outcome/group, %zu missing), %zu "
                "features, %zu protected, %zu unprotected\n",
                loaded.dataset.size(), loaded.raw_rows, loaded.dropped_unknown_value,
                loaded.dropped_missing, loaded.dataset.dim(),
                loaded.dataset.count(Group::protected_group),
                loaded.dataset.count(Group::unprotected_group));
  }
  if (!opts.predictions.empty()) {
    const auto records =
        load_external_predictions(opts.predictions, schema ? schema->groups : GroupLabels{});
    std::printf("predictions: %zu records, %d folds\n", records.size(), fold_count(records));
  }
  if (!opts.report.empty()) {
    const ParsedReport parsed = read_json(opts.report);
    for (const auto& w : parsed.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::printf("report: schema version %d, %zu verdicts\n", parsed.report.schema_version,
                parsed.report.verdicts.size());
  }
  return kExitOk;
}

struct SynthOptions {
  SynthConfig config;
  std::string bias = "outcome_shift";
  double magnitude = 0.0;
  std::string data_out = "synth.csv";
  std::string schema_out = "synth.toml";
};

int synth(const SynthOptions& opts) {
  Dataset data = generate(opts.config);
  if (opts.magnitude > 0.0) {
    data = inject_bias(data, bias_mechanism_from_string(opts.bias), opts.magnitude,
                       opts.config.seed + 1);
  }
  const Schema schema = synth_schema(data);
  write_dataset_csv(data, schema, opts.data_out);
  write_schema(schema, opts.schema_out);
  std::printf("wrote %zu rows to %s and schema to %s\n", data.size(), opts.data_out.c_str(),
              opts.schema_out.c_str());
  return kExitOk;
}

void add_training_flags(CLI::App* cmd, AuditConfig& a) {
  cmd->add_option("--learning-rate", a.params.learning_rate, "Gradient descent step size")
      ->capture_default_str();
  cmd->add_option("--iterations", a.params.iterations, "Maximum gradient descent iterations")
      ->capture_default_str();
  cmd->add_option("--l2", a.params.l2, "L2 penalty on non-intercept weights")
      ->capture_default_str();
  cmd->add_flag("--stratified", a.stratified, "Stratify folds by outcome");
  cmd->add_option("--model-id", a.model_id, "Model name written to the report")
      ->capture_default_str();
  cmd->add_option("--workers", a.workers, "Worker threads for fold training (0 = all cores)")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Statistical fairness audit of a binary classifier"};
  app.require_subcommand(1);

  RunOptions run_opts;
  AuditConfig& a = run_opts.audit;
  auto* run_cmd = app.add_subcommand("run", "Cross-validate and audit a model, write report.json and report.md");
  run_cmd->add_option("--data", a.data_path, "Delimited data file");
  run_cmd->add_option("--predictions", a.predictions_path, "External prediction file; skips training");
  run_cmd->add_option("--schema", a.schema_path, "Schema file (.toml or .json)");
  run_cmd->add_option("--k", a.k, "Number of folds")->capture_default_str();
  run_cmd->add_option("--alpha", a.alpha, "Significance level")->capture_default_str();
  run_cmd->add_option("--bins", a.bins, "Calibration score bins")->capture_default_str();
  run_cmd->add_option("--seed", a.seed, "Seed for folds and model initialization")
      ->capture_default_str();
  run_cmd->add_option("--threshold", a.threshold, "Score threshold for the unfavorable label")
      ->capture_default_str();
  run_cmd->add_flag("--include-race,!--exclude-race", a.include_group,
                    "Use the group as a model feature (default on)");
  run_cmd->add_flag("--fail-on-violation", run_opts.fail_on_violation,
                    "Exit with 1 when any metric reports a violation");
  run_cmd->add_flag("!--skip-matching", a.awareness, "Skip the nearest-neighbor test");
  run_cmd->add_option("--out", run_opts.out_dir,
                      std::string("Report directory (default $") + kReportDirEnv + " or .)");
  add_training_flags(run_cmd, a);

  ValidateOptions val_opts;
  auto* val_cmd = app.add_subcommand("validate", "Check input files without auditing");
  val_cmd->add_option("--data", val_opts.data, "Delimited data file");
  val_cmd->add_option("--schema", val_opts.schema, "Schema file");
  val_cmd->add_option("--predictions", val_opts.predictions, "Prediction file");
  val_cmd->add_option("--report", val_opts.report, "report.json to re-parse");

  SynthOptions syn_opts;
  auto* syn_cmd = app.add_subcommand("synth", "Generate a synthetic dataset and its schema");
  syn_cmd->add_option("--n", syn_opts.config.n, "Rows")->capture_default_str();
  syn_cmd->add_option("--d", syn_opts.config.d, "Features")->capture_default_str();
  syn_cmd->add_option("--group-shift", syn_opts.config.group_shift,
                      "Logit shift toward the unfavorable outcome for protected rows")
      ->capture_default_str();
  syn_cmd->add_option("--group-mix", syn_opts.config.group_mix, "Share of protected rows")
      ->capture_default_str();
  syn_cmd->add_option("--intercept", syn_opts.config.intercept, "Outcome logit intercept")
      ->capture_default_str();
  syn_cmd->add_option("--seed", syn_opts.config.seed, "Generator seed")->capture_default_str();
  syn_cmd->add_option("--bias", syn_opts.bias, "outcome_shift or label_noise_on_protected")
      ->capture_default_str();
  syn_cmd->add_option("--magnitude", syn_opts.magnitude, "Bias magnitude in [0, 1]")
      ->capture_default_str();
  syn_cmd->add_option("--out", syn_opts.data_out, "Data file")->capture_default_str();
  syn_cmd->add_option("--schema-out", syn_opts.schema_out, "Schema file")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*run_cmd) return run(run_opts);
    if (*val_cmd) return validate(val_opts);
    return synth(syn_opts);
  } catch (const InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInternal;
  }
}
