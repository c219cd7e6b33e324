#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "seqcfa/dataio.hpp"
#include "seqcfa/error.hpp"
#include "seqcfa/harness.hpp"
#include "seqcfa/model_spec.hpp"
#include "seqcfa/report.hpp"

namespace fs = std::filesystem;
using namespace seqcfa;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitAllFailed = 3;

ModelSpec load_model(const fs::path& path) { return parse_model(read_text_file(path)); }

std::pair<double, double> parse_range(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw CLI::ValidationError("--range-check", "expected LO,HI");
  try {
    const double lo = std::stod(text.substr(0, comma));
    const double hi = std::stod(text.substr(comma + 1));
    if (!(lo <= hi)) throw CLI::ValidationError("--range-check", "LO must not exceed HI");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw CLI::ValidationError("--range-check", "expected two numbers LO,HI");
  }
}

struct FitArgs {
  std::string model, data, method = "sequential", out, config, scores, id_column, score_method = "bartlett";
  bool standardized = false;
};

int run_fit(const FitArgs& a) {
  const ModelSpec spec = load_model(a.model);
  FitOptions fit_opts;
  if (!a.config.empty()) fit_opts = parse_fit_options(read_text_file(a.config));
  if (a.standardized) fit_opts.standardize = true;

  LoadOptions lo;
  lo.id_column = a.id_column;
  lo.value_columns = spec.variable_names();
  const PanelData panel = load_panel(a.data, lo);
  const PanelGroup& group = panel.groups.begin()->second;
  if (group.rows_dropped > 0)
    std::cerr << "dropped " << group.rows_dropped << " incomplete row(s)\n";
  const ScoreMethod method = score_method_from_string(a.score_method);

  json out{{"schema_version", kSchemaVersion}, {"method", a.method}, {"n_obs", group.data.n_obs()}};
  Eigen::MatrixXd scores;
  std::vector<std::string> names;
  bool ok = false;
  if (a.method == "sequential") {
    SequentialOptions so;
    so.fit = fit_opts;
    so.method = method;
    const SequentialResult res = fit_sequential(spec, group.data, so);
    out["sequential"] = sequential_json(res, fit_opts.standardize);
    ok = res.completed;
    if (ok) {
      scores = res.final_scores.values;
      names = res.final_scores.factor_names;
    }
  } else if (a.method == "traditional") {
    const FittedModel fit =
        spec.levels() >= 2 ? fit_traditional(spec, group.data, fit_opts) : fit_cfa(spec, group.data, fit_opts);
    out["fit"] = fit_json(fit, fit_opts.standardize);
    ok = fit.converged();
    if (ok) {
      const FactorScores fs = compute_scores(fit, group.data, method);
      scores = fs.values;
      names = fs.factor_names;
    }
  } else {
    throw CLI::ValidationError("--method", "expected traditional or sequential");
  }

  if (ok && !a.scores.empty()) {
    write_scores_csv(a.scores, scores, names, group.ids);
    out["scores_file"] = a.scores;
  }
  write_text_file(a.out, out.dump(2) + "\n");
  if (!ok) std::cerr << "estimation did not converge; see " << a.out << "\n";
  return kExitOk;
}

struct SimArgs {
  std::string design, out, model;
  int reps = 100;
  std::uint64_t seed = 1;
  std::vector<int> sizes;
  std::vector<double> error_levels;
  int threads = 1;
};

int run_simulate(const SimArgs& a) {
  const Design design = design_from_string(a.design);
  std::optional<ModelSpec> custom;
  if (design == Design::Custom) {
    if (a.model.empty()) throw CLI::ValidationError("--model", "the custom design needs --model");
    custom = load_model(a.model);
  }
  GridSpec grid = default_grid(design == Design::Custom ? Design::Simple : design);
  if (!a.sizes.empty()) grid.sizes = a.sizes;
  if (!a.error_levels.empty()) grid.error_levels = a.error_levels;

  RunOptions opts;
  opts.threads = a.threads;
  const auto results = run_grid(design, grid, a.reps, a.seed, opts, custom);
  const SummaryTable table = summarize(results);

  const fs::path dir = a.out;
  emit_reports(table, results, dir, ReportFormat::Csv);
  write_text_file(dir / "summary.md", summary_markdown(table));
  json meta{{"schema_version", kSchemaVersion},
            {"design", std::string(to_string(design))},
            {"reps", a.reps},
            {"seed", a.seed},
            {"sizes", grid.sizes},
            {"error_levels", grid.error_levels},
            {"cross_loadings", grid.cross_loadings},
            {"replications", table.total_replications}};
  write_text_file(dir / "run.json", meta.dump(2) + "\n");
  std::cout << summary_markdown(table);
  return kExitOk;
}

struct ValidateArgs {
  std::string data, model, year_column, out, id_column, range;
};

int run_validate(const ValidateArgs& a) {
  const ModelSpec spec = load_model(a.model);
  LoadOptions lo;
  lo.id_column = a.id_column;
  lo.group_column = a.year_column;
  lo.value_columns = spec.variable_names();
  if (!a.range.empty()) lo.range = parse_range(a.range);
  const PanelData panel = load_panel(a.data, lo);
  for (const auto& w : panel.warnings) std::cerr << "warning: " << w << "\n";

  const auto reports = validate_pipeline(panel, spec);
  const fs::path dir = a.out;
  json j = validation_json(reports);
  j["warnings"] = panel.warnings;
  write_text_file(dir / "validation.json", j.dump(2) + "\n");

  for (const auto& y : reports) {
    const std::string file = "scores_" + y.group + ".csv";
    Eigen::MatrixXd cols(y.mean_index.size(), 1 + y.sequential_scores.cols());
    cols.col(0) = y.mean_index;
    std::vector<std::string> names{"mean_index"};
    if (y.sequential_completed) {
      cols.rightCols(y.sequential_scores.cols()) = y.sequential_scores;
      names.insert(names.end(), y.score_names.begin(), y.score_names.end());
    }
    write_scores_csv(dir / file, cols, names, y.ids);
    std::cout << y.group << ": n=" << y.n_obs << " sequential="
              << (y.sequential_completed ? "converged" : "failed at stage " + std::to_string(y.failed_stage));
    if (y.traditional_attempted) std::cout << " traditional=" << to_string(y.traditional_status);
    std::cout << "\n";
  }
  return kExitOk;
}

int run_report(const std::string& in, const std::string& format_text) {
  const ReportFormat format = report_format_from_string(format_text);
  const fs::path dir = in;
  const auto results = parse_replications_csv(read_text_file(dir / "replications.csv"));
  const SummaryTable table = summarize(results);
  const std::string text = format == ReportFormat::Csv ? summary_csv(table) : summary_markdown(table);
  write_text_file(dir / (format == ReportFormat::Csv ? "summary.csv" : "summary.md"), text);
  std::cout << text;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential and traditional hierarchical CFA"};
  app.require_subcommand(1);

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Fit a model to a data CSV");
  fit->add_option("--model", fa.model, "Model syntax file")->required()->check(CLI::ExistingFile);
  fit->add_option("--data", fa.data, "Data CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--method", fa.method, "traditional or sequential")
      ->check(CLI::IsMember({"traditional", "sequential"}));
  fit->add_option("--out", fa.out, "Result JSON")->required();
  fit->add_option("--config", fa.config, "Estimator options (key = value)")->check(CLI::ExistingFile);
  fit->add_option("--scores", fa.scores, "Write top-level factor scores to this CSV");
  fit->add_option("--id-column", fa.id_column, "Identifier column");
  fit->add_option("--score-method", fa.score_method, "bartlett or regression")
      ->check(CLI::IsMember({"bartlett", "regression"}));
  fit->add_flag("--standardized", fa.standardized, "Report standardized estimates");

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate", "Run the Monte Carlo grid");
  sim->add_option("--design", sa.design, "simple, complex, most-complex or custom")
      ->required()
      ->check(CLI::IsMember({"simple", "complex", "most-complex", "custom"}));
  sim->add_option("--reps", sa.reps, "Replications per condition")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sa.seed, "Grid seed");
  sim->add_option("--out", sa.out, "Output directory")->required();
  sim->add_option("--sizes", sa.sizes, "Sample sizes (overrides the design default)")->delimiter(',');
  sim->add_option("--error-levels", sa.error_levels, "Residual variance shares")->delimiter(',');
  sim->add_option("--threads", sa.threads, "Worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);
  sim->add_option("--model", sa.model, "Model file for the custom design")->check(CLI::ExistingFile);

  ValidateArgs va;
  auto* val = app.add_subcommand("validate", "Per-year validation of a panel");
  val->add_option("--data", va.data, "Panel CSV")->required()->check(CLI::ExistingFile);
  val->add_option("--model", va.model, "Model syntax file")->required()->check(CLI::ExistingFile);
  val->add_option("--year-column", va.year_column, "Grouping column")->required();
  val->add_option("--out", va.out, "Output directory")->required();
  val->add_option("--id-column", va.id_column, "Identifier column");
  val->add_option("--range-check", va.range, "Warn on values outside LO,HI");

  std::string report_in, report_format = "csv";
  auto* rep = app.add_subcommand("report", "Re-summarize replications.csv");
  rep->add_option("--in", report_in, "Directory with replications.csv")->required()->check(CLI::ExistingDirectory);
  rep->add_option("--format", report_format, "csv or md")->check(CLI::IsMember({"csv", "md"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*fit) return run_fit(fa);
    if (*sim) return run_simulate(sa);
    if (*val) return run_validate(va);
    if (*rep) return run_report(report_in, report_format);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const AllFailedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAllFailed;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const SyntaxError& e) {
    std::cerr << "model syntax error: " << e.what() << "\n";
    return kExitData;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return kExitData;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
