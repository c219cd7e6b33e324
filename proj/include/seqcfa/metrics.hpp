#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seqcfa/estimator.hpp"

namespace seqcfa {

/// Global fit indices against the independence baseline. TLI and RMSEA are
/// empty when the model has zero degrees of freedom.
struct FitIndexBlock {
  double cfi = 1.0;
  std::optional<double> tli;
  std::optional<double> rmsea;
  double srmr = 0.0;
  double chi_square = 0.0;
  int df = 0;
  int n_obs = 0;
  double baseline_chi_square = 0.0;
  int baseline_df = 0;
};

/// Formula layer, usable without a fit.
FitIndexBlock fit_indices_from_chi_square(double chi_m, int df_m, double chi_b, int df_b, int n_obs);

/// Root mean square of residual correlations over the lower triangle (diagonal included).
double srmr(const Eigen::MatrixXd& sample_cov, const Eigen::MatrixXd& implied_cov);

/// Throws Error unless the fit converged.
FitIndexBlock fit_indices(const FittedModel& fit, const Eigen::MatrixXd& sample_cov);

/// (sum lambda)^2 / ((sum lambda)^2 + sum theta) on standardized estimates.
double mcdonald_omega(std::span<const double> lambda, std::span<const double> theta);

/// Omega for every factor that loads observed items directly.
std::vector<std::pair<std::string, double>> omega_per_factor(const FittedModel& fit);

/// RMSE after standardizing both vectors and reflecting `estimated` to agree in sign with `truth`.
double rmse_aligned(const Eigen::VectorXd& estimated, const Eigen::VectorXd& truth);

double pearson_r(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct PairedTestResult {
  double mean_diff = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double t_stat = 0.0;
  int df = 0;
  double p_value = 1.0;
};

/// Two-sided one-sample t test of the mean difference against zero with a
/// t-based confidence interval. Throws NumericError for zero-variance input.
PairedTestResult paired_t_test(const Eigen::VectorXd& diffs, double confidence = 0.95);

}  // namespace seqcfa
