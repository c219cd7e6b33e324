#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "seqcfa/harness.hpp"

namespace seqcfa {

inline constexpr int kSchemaVersion = 1;

enum class ReportFormat { Csv, Markdown };
ReportFormat report_format_from_string(std::string_view text);

/// Column layout: n, Distribution, Residual Pattern, Sequential RMSE, Traditional RMSE.
std::string summary_csv(const SummaryTable& table);
std::string summary_markdown(const SummaryTable& table);
/// Every SummaryRow field, including r means and convergence counts.
std::string summary_full_csv(const SummaryTable& table);
std::string paired_tests_csv(const SummaryTable& table);

/// One line per replication; wall time is left out so reruns compare byte-for-byte.
std::string replications_csv(const std::vector<ReplicationResult>& results);
/// Inverse of replications_csv. Custom-design rows come back without their spec.
std::vector<ReplicationResult> parse_replications_csv(std::string_view text);

/// Long-form (method, data_type, rmse) rows for density plots. data_type is
/// "<distribution>/<pattern>/n=<n>".
std::string rmse_distribution_csv(const std::vector<ReplicationResult>& results);

/// Writes summary.<csv|md>, summary_full.csv, paired_tests.csv,
/// replications.csv and rmse_distribution.csv under `dir`.
void emit_reports(const SummaryTable& table, const std::vector<ReplicationResult>& results,
                  const std::filesystem::path& dir, ReportFormat format);

nlohmann::json to_json(const FitIndexBlock& block);
/// Loadings are emitted only for converged fits.
nlohmann::json fit_json(const FittedModel& fit, bool standardized);
nlohmann::json sequential_json(const SequentialResult& result, bool standardized);
nlohmann::json validation_json(const std::vector<YearReport>& reports);

}  // namespace seqcfa
