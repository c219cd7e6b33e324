#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "seqcfa/dataio.hpp"
#include "seqcfa/error.hpp"
#include "seqcfa/estimator.hpp"
#include "seqcfa/metrics.hpp"
#include "seqcfa/scoring.hpp"
#include "seqcfa/sequential.hpp"
#include "seqcfa/simgen.hpp"

namespace seqcfa {

/// Condition lists crossed to form a simulation grid.
struct GridSpec {
  std::vector<int> sizes;
  std::vector<double> error_levels{0.2, 0.4, 0.6};
  std::vector<Distribution> distributions{Distribution::Normal, Distribution::Skewed};
  std::vector<ResidualPattern> patterns{ResidualPattern::Heteroskedastic, ResidualPattern::Homoskedastic};
  std::vector<double> cross_loadings{0.0};
};

/// Default grid: sizes {100, 500, 1000, 2000, 5000} for simple/complex,
/// {200, 500, 1000} with cross-loadings {0, 0.2} for most-complex.
GridSpec default_grid(Design design);

/// Conditions in grid order (size, distribution, pattern, error level, cross-loading).
/// Seeds are left at zero; run_grid derives them.
std::vector<SimCondition> expand_grid(Design design, const GridSpec& grid,
                                      const std::optional<ModelSpec>& custom = std::nullopt);

struct RunOptions {
  FitOptions fit;
  ScoreMethod method = ScoreMethod::Bartlett;
  bool standardize_forwarded = true;
  int threads = 1;
};

struct ReplicationResult {
  SimCondition condition;
  int condition_index = 0;
  int rep = 0;
  std::optional<double> rmse_seq;
  std::optional<double> rmse_trad;
  std::optional<double> r_seq;
  std::optional<double> r_trad;
  FitStatus status_seq = FitStatus::NonConverged;
  FitStatus status_trad = FitStatus::NonConverged;
  std::chrono::duration<double> wall_time{0.0};
  std::uint64_t data_checksum = 0;
  /// Largest |W L - I| over every converged fit in this replication.
  double max_unbiasedness_error = 0.0;

  bool both_converged() const {
    return status_seq == FitStatus::Converged && status_trad == FitStatus::Converged;
  }
};

/// Generates one dataset and runs both estimators on it.
ReplicationResult run_replication(const SimCondition& condition, int condition_index, int rep,
                                  const RunOptions& options = {});

/// Every condition x rep. Seeds derive from (seed, condition index, rep), so
/// thread count does not affect results.
std::vector<ReplicationResult> run_grid(Design design, const GridSpec& grid, int reps, std::uint64_t seed,
                                        const RunOptions& options = {},
                                        const std::optional<ModelSpec>& custom = std::nullopt);

/// Paired comparison over replications where both methods converged.
struct PairedOutcome {
  int n_pairs = 0;
  double mean_diff = 0.0;
  std::optional<PairedTestResult> test;  // empty when degenerate or fewer than two pairs
  std::string note;
};

struct SummaryRow {
  int n = 0;
  Distribution distribution = Distribution::Normal;
  ResidualPattern pattern = ResidualPattern::Homoskedastic;
  int replications = 0;
  int converged_seq = 0;
  int converged_trad = 0;
  int converged_both = 0;
  std::optional<double> rmse_seq;
  std::optional<double> rmse_trad;
  std::optional<double> r_seq;
  std::optional<double> r_trad;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;
  PairedOutcome rmse;  // rmse_seq - rmse_trad
  PairedOutcome r;     // r_seq - r_trad
  int total_replications = 0;
};

/// Thrown when no replication produced a converged fit.
class AllFailedError : public Error {
 public:
  using Error::Error;
};

/// Stratified means (error levels pooled) and pooled paired tests. Input order
/// does not matter: results are sorted canonically before aggregation.
SummaryTable summarize(std::vector<ReplicationResult> results);

/// Paired test of seq - trad for `metric` over the selected replications.
PairedOutcome paired_outcome(const std::vector<ReplicationResult>& results,
                             const std::function<bool(const ReplicationResult&)>& select, bool use_rmse,
                             double confidence = 0.95);

// ---------------------------------------------------------------------------
// Real-data validation

struct StageReport {
  int stage = 0;
  std::vector<std::string> factors;
  FitStatus status = FitStatus::NonConverged;
  std::string message;
  std::optional<FitIndexBlock> indices;
  std::vector<std::pair<std::string, double>> omega;
  std::optional<double> mean_omega;
};

struct YearReport {
  std::string group;
  int n_obs = 0;
  int rows_dropped = 0;
  bool traditional_attempted = false;
  FitStatus traditional_status = FitStatus::NonConverged;
  std::string traditional_message;
  std::optional<FitIndexBlock> traditional_indices;
  std::optional<FittedModel> traditional_fit;  // set only when converged
  bool sequential_completed = false;
  int failed_stage = 0;
  std::string sequential_message;
  std::vector<StageReport> stages;
  std::vector<std::string> ids;
  Eigen::VectorXd mean_index;        // equal-weight mean of the model items
  Eigen::MatrixXd sequential_scores;  // final-stage scores (empty unless completed)
  std::vector<std::string> score_names;
};

/// Fits each group independently: the traditional model (status only when it
/// fails) and the sequential pipeline with per-stage indices and omega. A flat
/// model is a single stage, and its traditional fit is the same CFA.
/// Throws AllFailedError when no group yields any converged stage.
std::vector<YearReport> validate_pipeline(const PanelData& panel, const ModelSpec& spec,
                                          const SequentialOptions& options = {});

}  // namespace seqcfa
