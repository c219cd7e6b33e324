#include "seqcfa/metrics.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>

#include "seqcfa/error.hpp"

namespace seqcfa {

FitIndexBlock fit_indices_from_chi_square(double chi_m, int df_m, double chi_b, int df_b, int n_obs) {
  FitIndexBlock b;
  b.chi_square = chi_m;
  b.df = df_m;
  b.n_obs = n_obs;
  b.baseline_chi_square = chi_b;
  b.baseline_df = df_b;

  const double excess_m = std::max(chi_m - df_m, 0.0);
  const double excess_b = std::max(chi_b - df_b, 0.0);
  const double denom = std::max(excess_b, excess_m);
  b.cfi = denom > 0.0 ? std::clamp(1.0 - excess_m / denom, 0.0, 1.0) : 1.0;

  if (df_m > 0 && df_b > 0) {
    const double ratio_b = chi_b / df_b;
    if (ratio_b != 1.0) b.tli = (ratio_b - chi_m / df_m) / (ratio_b - 1.0);
    if (n_obs > 1) b.rmsea = std::sqrt(excess_m / (static_cast<double>(df_m) * (n_obs - 1)));
  }
  return b;
}

double srmr(const Eigen::MatrixXd& sample_cov, const Eigen::MatrixXd& implied_cov) {
  const Eigen::Index p = sample_cov.rows();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double rs = sample_cov(i, j) / std::sqrt(sample_cov(i, i) * sample_cov(j, j));
      const double ri = implied_cov(i, j) / std::sqrt(implied_cov(i, i) * implied_cov(j, j));
      sum += (rs - ri) * (rs - ri);
    }
  return std::sqrt(sum / (static_cast<double>(p) * (p + 1) / 2.0));
}

FitIndexBlock fit_indices(const FittedModel& fit, const Eigen::MatrixXd& sample_cov) {
  if (!fit.converged()) throw Error("fit indices need a converged fit");
  const auto p = static_cast<int>(sample_cov.rows());
  const Eigen::MatrixXd implied = fit.estimates.implied();
  const double chi_m = (fit.n_obs - 1) * std::max(0.0, ml_discrepancy(sample_cov, implied, p));
  const FittedModel baseline = fit_independence(sample_cov, fit.n_obs, fit.observed);
  FitIndexBlock b = fit_indices_from_chi_square(chi_m, fit.df, baseline.chi_square, baseline.df, fit.n_obs);
  b.srmr = srmr(sample_cov, implied);
  return b;
}

double mcdonald_omega(std::span<const double> lambda, std::span<const double> theta) {
  if (lambda.empty()) throw Error("omega needs at least one loading");
  if (lambda.size() != theta.size()) throw Error("omega: loading and residual counts differ");
  double sum_l = 0.0, sum_t = 0.0;
  for (double l : lambda) sum_l += l;
  for (double t : theta) {
    if (t < 0.0) throw Error("omega: negative residual variance");
    sum_t += t;
  }
  const double common = sum_l * sum_l;
  if (!(common + sum_t > 0.0)) throw Error("omega: zero total variance");
  return common / (common + sum_t);
}

std::vector<std::pair<std::string, double>> omega_per_factor(const FittedModel& fit) {
  const StandardizedSolution std_sol = standardize(fit);
  std::vector<std::pair<std::string, double>> out;
  for (Eigen::Index j = 0; j < std_sol.lambda.cols(); ++j) {
    std::vector<double> l, t;
    for (const auto& ind : fit.spec.factor(fit.factors[j]).indicators) {
      auto it = std::find(fit.observed.begin(), fit.observed.end(), ind);
      if (it == fit.observed.end()) continue;
      const auto i = it - fit.observed.begin();
      l.push_back(std_sol.lambda(i, j));
      t.push_back(std_sol.theta(i));
    }
    if (!l.empty()) out.emplace_back(fit.factors[j], mcdonald_omega(l, t));
  }
  return out;
}

namespace {

Eigen::VectorXd zscore(const Eigen::VectorXd& v, const char* what) {
  const Eigen::VectorXd c = v.array() - v.mean();
  const double sd = std::sqrt(c.squaredNorm() / static_cast<double>(v.size()));
  if (!(sd > 0.0)) throw NumericError(std::string(what) + " has zero variance");
  return c / sd;
}

void check_pair(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw Error("vectors differ in length");
  if (x.size() < 2) throw Error("at least two observations are required");
}

}  // namespace

double pearson_r(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  check_pair(x, y);
  const double r = zscore(x, "x").dot(zscore(y, "y")) / static_cast<double>(x.size());
  return std::clamp(r, -1.0, 1.0);
}

double rmse_aligned(const Eigen::VectorXd& estimated, const Eigen::VectorXd& truth) {
  check_pair(estimated, truth);
  Eigen::VectorXd e = zscore(estimated, "estimate");
  const Eigen::VectorXd t = zscore(truth, "truth");
  if (e.dot(t) < 0.0) e = -e;
  return std::sqrt((e - t).squaredNorm() / static_cast<double>(e.size()));
}

PairedTestResult paired_t_test(const Eigen::VectorXd& diffs, double confidence) {
  if (diffs.size() < 2) throw Error("paired t test needs at least two differences");
  if (!(confidence > 0.0 && confidence < 1.0)) throw Error("confidence must lie in (0, 1)");
  const double n = static_cast<double>(diffs.size());
  const double mean = diffs.mean();
  const double var = (diffs.array() - mean).square().sum() / (n - 1.0);
  if (!(var > 0.0)) throw NumericError("differences have zero variance; t statistic is undefined");
  const double se = std::sqrt(var / n);

  PairedTestResult r;
  r.mean_diff = mean;
  r.df = static_cast<int>(diffs.size()) - 1;
  r.t_stat = mean / se;
  const double nu = r.df;
  // Two-sided tail: I_{nu/(nu+t^2)}(nu/2, 1/2).
  r.p_value = std::clamp(boost::math::ibeta(nu / 2.0, 0.5, nu / (nu + r.t_stat * r.t_stat)), 0.0, 1.0);
  const double q = boost::math::quantile(boost::math::students_t(nu), 0.5 + confidence / 2.0);
  r.ci_low = mean - q * se;
  r.ci_high = mean + q * se;
  return r;
}

}  // namespace seqcfa
