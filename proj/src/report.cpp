#include "seqcfa/report.hpp"

#include <charconv>
#include <cstdio>

#include "seqcfa/dataio.hpp"
#include "seqcfa/error.hpp"

namespace seqcfa {

using nlohmann::json;

ReportFormat report_format_from_string(std::string_view text) {
  if (text == "csv") return ReportFormat::Csv;
  if (text == "md" || text == "markdown") return ReportFormat::Markdown;
  throw Error("unknown report format '" + std::string(text) + "' (expected csv or md)");
}

namespace {

std::string num(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string exact(const std::optional<double>& v) { return v ? exact(*v) : "NA"; }

std::string fixed3(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", *v);
  return buf;
}

std::string stratum_prefix(const SummaryRow& r) {
  return std::to_string(r.n) + "," + std::string(to_string(r.distribution)) + "," +
         std::string(to_string(r.pattern));
}

}  // namespace

std::string summary_csv(const SummaryTable& table) {
  std::string out = "n,Distribution,Residual Pattern,Sequential RMSE,Traditional RMSE\n";
  for (const auto& r : table.rows) out += stratum_prefix(r) + "," + num(r.rmse_seq) + "," + num(r.rmse_trad) + "\n";
  return out;
}

std::string summary_markdown(const SummaryTable& table) {
  std::string out =
      "| n | Distribution | Residual Pattern | Sequential RMSE | Traditional RMSE |\n"
      "|---:|---|---|---:|---:|\n";
  for (const auto& r : table.rows)
    out += "| " + std::to_string(r.n) + " | " + std::string(to_string(r.distribution)) + " | " +
           std::string(to_string(r.pattern)) + " | " + fixed3(r.rmse_seq) + " | " + fixed3(r.rmse_trad) + " |\n";
  return out;
}

std::string summary_full_csv(const SummaryTable& table) {
  std::string out =
      "n,Distribution,Residual Pattern,replications,converged_seq,converged_trad,converged_both,"
      "rmse_seq,rmse_trad,r_seq,r_trad\n";
  for (const auto& r : table.rows)
    out += stratum_prefix(r) + "," + std::to_string(r.replications) + "," + std::to_string(r.converged_seq) + "," +
           std::to_string(r.converged_trad) + "," + std::to_string(r.converged_both) + "," + num(r.rmse_seq) + "," +
           num(r.rmse_trad) + "," + num(r.r_seq) + "," + num(r.r_trad) + "\n";
  return out;
}

std::string paired_tests_csv(const SummaryTable& table) {
  std::string out = "metric,n_pairs,mean_diff,ci_low,ci_high,t_stat,df,p_value,note\n";
  auto line = [&](const char* name, const PairedOutcome& o) {
    out += std::string(name) + "," + std::to_string(o.n_pairs) + "," + format_number(o.mean_diff);
    if (o.test)
      out += "," + format_number(o.test->ci_low) + "," + format_number(o.test->ci_high) + "," +
             format_number(o.test->t_stat) + "," + std::to_string(o.test->df) + "," + format_number(o.test->p_value);
    else
      out += ",NA,NA,NA,NA,NA";
    out += "," + csv_field(o.note) + "\n";
  };
  line("rmse", table.rmse);
  line("r", table.r);
  return out;
}

namespace {
constexpr const char* kReplicationHeader =
    "design,condition_index,rep,seed,n,distribution,residual_pattern,error_level,cross_loading,"
    "status_seq,status_trad,rmse_seq,rmse_trad,r_seq,r_trad,data_checksum,max_unbiasedness_error";
}

std::string replications_csv(const std::vector<ReplicationResult>& results) {
  std::string out = std::string(kReplicationHeader) + "\n";
  for (const auto& r : results) {
    const auto& c = r.condition;
    out += std::string(to_string(c.design)) + "," + std::to_string(r.condition_index) + "," + std::to_string(r.rep) +
           "," + std::to_string(c.seed) + "," + std::to_string(c.n_obs) + "," +
           std::string(to_string(c.distribution)) + "," + std::string(to_string(c.residual_pattern)) + "," +
           exact(c.error_level) + "," + exact(c.cross_loading) + "," + std::string(to_string(r.status_seq)) + "," +
           std::string(to_string(r.status_trad)) + "," + exact(r.rmse_seq) + "," + exact(r.rmse_trad) + "," +
           exact(r.r_seq) + "," + exact(r.r_trad) + "," + std::to_string(r.data_checksum) + "," +
           exact(r.max_unbiasedness_error) + "\n";
  }
  return out;
}

namespace {

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw DataError("not a number: '" + s + "'");
  return v;
}

std::optional<double> to_opt(const std::string& s) {
  if (s == "NA") return std::nullopt;
  return to_double(s);
}

template <typename T>
T to_integer(const std::string& s) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw DataError("not an integer: '" + s + "'");
  return v;
}

}  // namespace

std::vector<ReplicationResult> parse_replications_csv(std::string_view text) {
  const CsvTable t = parse_csv(text);
  std::string header;
  for (std::size_t i = 0; i < t.header.size(); ++i) header += (i ? "," : "") + t.header[i];
  if (header != kReplicationHeader) throw DataError("not a replications CSV (unexpected header)");
  std::vector<ReplicationResult> out;
  for (const auto& row : t.rows) {
    ReplicationResult r;
    auto& c = r.condition;
    c.design = design_from_string(row[0]);
    r.condition_index = to_integer<int>(row[1]);
    r.rep = to_integer<int>(row[2]);
    c.seed = to_integer<std::uint64_t>(row[3]);
    c.n_obs = to_integer<int>(row[4]);
    c.distribution = distribution_from_string(row[5]);
    c.residual_pattern = residual_pattern_from_string(row[6]);
    c.error_level = to_double(row[7]);
    c.cross_loading = to_double(row[8]);
    r.status_seq = fit_status_from_string(row[9]);
    r.status_trad = fit_status_from_string(row[10]);
    r.rmse_seq = to_opt(row[11]);
    r.rmse_trad = to_opt(row[12]);
    r.r_seq = to_opt(row[13]);
    r.r_trad = to_opt(row[14]);
    r.data_checksum = to_integer<std::uint64_t>(row[15]);
    r.max_unbiasedness_error = to_double(row[16]);
    auto consistent = [](FitStatus s, const std::optional<double>& a, const std::optional<double>& b) {
      return (s == FitStatus::Converged) == (a.has_value() && b.has_value());
    };
    if (!consistent(r.status_seq, r.rmse_seq, r.r_seq) || !consistent(r.status_trad, r.rmse_trad, r.r_trad))
      throw DataError("replication row has metrics inconsistent with its status");
    out.push_back(std::move(r));
  }
  return out;
}

std::string rmse_distribution_csv(const std::vector<ReplicationResult>& results) {
  std::string out = "method,data_type,rmse\n";
  for (const auto& r : results) {
    const auto& c = r.condition;
    const std::string type = std::string(to_string(c.distribution)) + "/" +
                             std::string(to_string(c.residual_pattern)) + "/n=" + std::to_string(c.n_obs);
    if (r.rmse_seq) out += "sequential," + type + "," + format_number(*r.rmse_seq) + "\n";
    if (r.rmse_trad) out += "traditional," + type + "," + format_number(*r.rmse_trad) + "\n";
  }
  return out;
}

void emit_reports(const SummaryTable& table, const std::vector<ReplicationResult>& results,
                  const std::filesystem::path& dir, ReportFormat format) {
  if (format == ReportFormat::Csv)
    write_text_file(dir / "summary.csv", summary_csv(table));
  else
    write_text_file(dir / "summary.md", summary_markdown(table));
  write_text_file(dir / "summary_full.csv", summary_full_csv(table));
  write_text_file(dir / "paired_tests.csv", paired_tests_csv(table));
  write_text_file(dir / "replications.csv", replications_csv(results));
  write_text_file(dir / "rmse_distribution.csv", rmse_distribution_csv(results));
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

json to_json(const FitIndexBlock& b) {
  return json{{"cfi", b.cfi},
              {"tli", opt(b.tli)},
              {"rmsea", opt(b.rmsea)},
              {"srmr", b.srmr},
              {"chi_square", b.chi_square},
              {"df", b.df},
              {"n_obs", b.n_obs},
              {"baseline_chi_square", b.baseline_chi_square},
              {"baseline_df", b.baseline_df}};
}

json fit_json(const FittedModel& fit, bool standardized) {
  json j{{"status", std::string(to_string(fit.status))},
         {"message", fit.message},
         {"n_obs", fit.n_obs},
         {"df", fit.df},
         {"iterations", fit.iterations},
         {"observed", fit.observed},
         {"factors", fit.factors}};
  if (!fit.converged()) return j;

  j["chi_square"] = fit.chi_square;
  j["discrepancy"] = fit.discrepancy;
  const auto& est = fit.estimates;
  std::optional<StandardizedSolution> st;
  if (standardized) st = standardize(fit);

  json loadings = json::array();
  for (const auto& def : fit.spec.factors()) {
    const Eigen::Index c = fit.factor_index(def.name);
    for (const auto& ind : def.indicators) {
      json entry{{"factor", def.name}, {"indicator", ind}};
      if (fit.spec.is_factor(ind)) {
        const Eigen::Index r = fit.factor_index(ind);
        entry["estimate"] = est.beta(r, c);
        if (st) entry["standardized"] = st->beta(r, c);
      } else {
        const auto r = std::find(fit.observed.begin(), fit.observed.end(), ind) - fit.observed.begin();
        entry["estimate"] = est.lambda(r, c);
        if (st) entry["standardized"] = st->lambda(r, c);
      }
      loadings.push_back(std::move(entry));
    }
  }
  j["loadings"] = std::move(loadings);

  json residuals = json::object();
  for (std::size_t i = 0; i < fit.observed.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    residuals[fit.observed[i]] = st ? st->theta(k) : est.theta(k);
  }
  j["residual_variances"] = std::move(residuals);
  j["factor_covariance"] = matrix_json(st ? st->factor_correlation : est.factor_covariance());
  j["fit_indices"] = to_json(fit_indices(fit, fit.sample_cov));
  return j;
}

json sequential_json(const SequentialResult& result, bool standardized) {
  json stages = json::array();
  for (std::size_t k = 0; k < result.stage_fits.size(); ++k) {
    json s = fit_json(result.stage_fits[k], standardized);
    s["stage"] = static_cast<int>(k) + 1;
    stages.push_back(std::move(s));
  }
  json j{{"completed", result.completed}, {"stages", std::move(stages)}};
  if (!result.completed) {
    j["failed_stage"] = result.failed_stage;
    j["failed_status"] = result.failed_status ? json(std::string(to_string(*result.failed_status))) : json(nullptr);
    j["message"] = result.message;
  }
  if (result.propagation) {
    const auto& p = *result.propagation;
    j["propagation"] = json{{"factors", p.factors},
                            {"nu_variance", std::vector<double>(p.nu_variance.data(),
                                                                p.nu_variance.data() + p.nu_variance.size())},
                            {"cov_eta1_hat", matrix_json(p.cov_eta1_hat)},
                            {"stage2_observed", p.stage2_observed},
                            {"cov_eta2_implied", matrix_json(p.cov_eta2_implied)}};
  }
  return j;
}

json validation_json(const std::vector<YearReport>& reports) {
  json groups = json::array();
  for (const auto& y : reports) {
    json g{{"group", y.group},
           {"n_obs", y.n_obs},
           {"rows_dropped", y.rows_dropped},
           {"sequential_completed", y.sequential_completed}};
    if (y.traditional_attempted) {
      json t{{"status", std::string(to_string(y.traditional_status))}, {"message", y.traditional_message}};
      if (y.traditional_fit) t["fit"] = fit_json(*y.traditional_fit, true);
      g["traditional"] = std::move(t);
    }
    if (!y.sequential_completed) {
      g["failed_stage"] = y.failed_stage;
      g["sequential_message"] = y.sequential_message;
    }
    json stages = json::array();
    for (const auto& s : y.stages) {
      json sj{{"stage", s.stage},
              {"factors", s.factors},
              {"status", std::string(to_string(s.status))},
              {"message", s.message}};
      if (s.indices) sj["fit_indices"] = to_json(*s.indices);
      json om = json::object();
      for (const auto& [name, w] : s.omega) om[name] = w;
      sj["omega"] = std::move(om);
      sj["mean_omega"] = opt(s.mean_omega);
      stages.push_back(std::move(sj));
    }
    g["stages"] = std::move(stages);
    groups.push_back(std::move(g));
  }
  return json{{"schema_version", kSchemaVersion}, {"groups", std::move(groups)}};
}

}  // namespace seqcfa
