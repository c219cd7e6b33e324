#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "seqcfa/data.hpp"
#include "seqcfa/estimator.hpp"
#include "seqcfa/model_spec.hpp"
#include "seqcfa/scoring.hpp"

namespace seqcfa {

/// How first-stage score error feeds into the second stage's covariance structure.
///
/// In score space Bartlett scores satisfy Cov(eta_hat) = Phi + Gamma^-1. The
/// diagonal of Gamma^-1 is the per-factor score error variance (nu); its
/// off-diagonal part is the residual-driven error covariance between scores.
struct PropagationReport {
  std::vector<std::string> factors;
  Eigen::MatrixXd cov_eta1_hat;
  /// Stage-two implied covariance of its observed score columns (empty until attached).
  Eigen::MatrixXd cov_eta2_implied;
  std::vector<std::string> stage2_observed;
  Eigen::VectorXd nu_variance;
};

/// diag((L' Theta^-1 L)^-1) for a converged flat fit.
Eigen::VectorXd bartlett_error_variance(const FittedModel& fit1);

PropagationReport propagated_covariance(const FittedModel& fit1, const Eigen::VectorXd& nu_variance);

void attach_stage2(PropagationReport& report, const FittedModel& fit2);

struct SequentialOptions {
  FitOptions fit;
  ScoreMethod method = ScoreMethod::Bartlett;
  /// Rescale forwarded score columns to mean 0, variance 1.
  bool standardize_forwarded = true;
};

struct SequentialResult {
  std::vector<ModelSpec> stage_specs;
  std::vector<FittedModel> stage_fits;
  std::vector<FactorScores> stage_scores;
  FactorScores final_scores;
  std::optional<PropagationReport> propagation;

  bool completed = false;
  /// 1-based stage that stopped the pipeline; 0 when completed.
  int failed_stage = 0;
  std::optional<FitStatus> failed_status;
  std::string message;
};

/// Fits each level in turn, forwarding factor scores as observed variables.
/// Stops at the first stage that throws or does not converge cleanly; later
/// stages are not attempted.
SequentialResult fit_sequential(const ModelSpec& spec, const DataMatrix& data, const SequentialOptions& options = {});

/// Weighted mean across columns for each row. Default weights are all 1.
Eigen::VectorXd mean_index(const Eigen::MatrixXd& columns, const std::optional<Eigen::VectorXd>& weights = {});

}  // namespace seqcfa
