#include "seqcfa/sequential.hpp"

#include <cmath>
#include <map>

#include "seqcfa/error.hpp"

namespace seqcfa {

Eigen::VectorXd bartlett_error_variance(const FittedModel& fit1) {
  if (!fit1.converged()) throw Error("score error variance needs a converged fit");
  return bartlett_error_covariance(fit1.estimates.lambda, fit1.estimates.theta).diagonal();
}

PropagationReport propagated_covariance(const FittedModel& fit1, const Eigen::VectorXd& nu_variance) {
  if (!fit1.converged()) throw Error("propagated_covariance needs a converged first-stage fit");
  const auto m = static_cast<Eigen::Index>(fit1.factors.size());
  if (nu_variance.size() != m) throw ModelError("nu_variance length must equal the number of factors");
  if ((nu_variance.array() < 0.0).any()) throw ModelError("nu_variance must be non-negative");

  Eigen::MatrixXd error_offdiag = bartlett_error_covariance(fit1.estimates.lambda, fit1.estimates.theta);
  error_offdiag.diagonal().setZero();

  PropagationReport r;
  r.factors = fit1.factors;
  r.nu_variance = nu_variance;
  r.cov_eta1_hat = fit1.estimates.factor_covariance() + error_offdiag;
  r.cov_eta1_hat.diagonal() += nu_variance;
  r.cov_eta1_hat = (r.cov_eta1_hat + r.cov_eta1_hat.transpose()) * 0.5;
  return r;
}

void attach_stage2(PropagationReport& report, const FittedModel& fit2) {
  report.cov_eta2_implied = fit2.estimates.implied();
  report.stage2_observed = fit2.observed;
}

namespace {

Eigen::VectorXd standardized(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  const Eigen::VectorXd c = v.array() - mean;
  const double sd = std::sqrt(c.squaredNorm() / static_cast<double>(v.size() - 1));
  return sd > 0.0 ? Eigen::VectorXd(c / sd) : c;
}

}  // namespace

SequentialResult fit_sequential(const ModelSpec& spec, const DataMatrix& data, const SequentialOptions& options) {
  SequentialResult res;
  res.stage_specs = stage_decomposition(spec);
  for (const auto& item : spec.variable_names())
    if (!data.has_column(item)) throw DataError("data have no column named '" + item + "'");

  std::map<std::string, Eigen::VectorXd> forwarded;
  for (std::size_t k = 0; k < res.stage_specs.size(); ++k) {
    const ModelSpec& stage = res.stage_specs[k];
    const int stage_no = static_cast<int>(k) + 1;
    const auto& vars = stage.variable_names();

    Eigen::MatrixXd values(data.n_obs(), static_cast<Eigen::Index>(vars.size()));
    for (std::size_t j = 0; j < vars.size(); ++j) {
      if (auto it = forwarded.find(vars[j]); it != forwarded.end())
        values.col(j) = it->second;
      else
        values.col(j) = data.column(vars[j]);
    }

    try {
      const DataMatrix stage_data(std::move(values), vars);
      FittedModel fit = fit_cfa(stage, stage_data, options.fit);
      if (!fit.converged()) {
        res.failed_stage = stage_no;
        res.failed_status = fit.status;
        res.message = "stage " + std::to_string(stage_no) + " " + std::string(to_string(fit.status)) + ": " +
                      fit.message;
        res.stage_fits.push_back(std::move(fit));
        return res;
      }
      FactorScores scores = compute_scores(fit, stage_data, options.method);
      for (std::size_t f = 0; f < scores.factor_names.size(); ++f) {
        const Eigen::VectorXd col = scores.values.col(static_cast<Eigen::Index>(f));
        forwarded[scores.factor_names[f]] = options.standardize_forwarded ? standardized(col) : col;
      }
      res.stage_fits.push_back(std::move(fit));
      res.stage_scores.push_back(std::move(scores));
    } catch (const Error& e) {
      res.failed_stage = stage_no;
      res.message = "stage " + std::to_string(stage_no) + ": " + e.what();
      return res;
    }
  }

  res.final_scores = res.stage_scores.back();
  try {
    PropagationReport prop =
        propagated_covariance(res.stage_fits[0], bartlett_error_variance(res.stage_fits[0]));
    attach_stage2(prop, res.stage_fits[1]);
    res.propagation = std::move(prop);
  } catch (const Error&) {
    // Singular Gamma would already have failed scoring; nothing to report otherwise.
  }
  res.completed = true;
  return res;
}

Eigen::VectorXd mean_index(const Eigen::MatrixXd& columns, const std::optional<Eigen::VectorXd>& weights) {
  if (columns.cols() < 1) throw Error("mean_index needs at least one column");
  Eigen::VectorXd w = weights.value_or(Eigen::VectorXd::Ones(columns.cols()));
  if (w.size() != columns.cols()) throw Error("mean_index: weight count must equal column count");
  if ((w.array() < 0.0).any()) throw Error("mean_index: weights must be non-negative");
  const double total = w.sum();
  if (!(total > 0.0)) throw Error("mean_index: weights are all zero");
  return columns * w / total;
}

}  // namespace seqcfa
