#include "seqcfa/scoring.hpp"

#include <algorithm>

#include "seqcfa/error.hpp"

namespace seqcfa {

namespace {

constexpr double kMinRcond = 1e-12;

Eigen::LLT<Eigen::MatrixXd> factor_gamma(const Eigen::MatrixXd& gamma) {
  Eigen::LLT<Eigen::MatrixXd> llt(gamma);
  if (gamma.size() == 0 || llt.info() != Eigen::Success || !(llt.rcond() > kMinRcond))
    throw NumericError("Gamma = L' Theta^-1 L is singular; factor scores are not determined");
  return llt;
}

}  // namespace

std::string_view to_string(ScoreMethod method) {
  return method == ScoreMethod::Bartlett ? "Bartlett" : "Regression";
}

ScoreMethod score_method_from_string(std::string_view text) {
  if (text == "Bartlett" || text == "bartlett") return ScoreMethod::Bartlett;
  if (text == "Regression" || text == "regression") return ScoreMethod::Regression;
  throw Error("unknown scoring method '" + std::string(text) + "'");
}

Eigen::VectorXd FactorScores::column(std::string_view factor) const {
  auto it = std::find(factor_names.begin(), factor_names.end(), factor);
  if (it == factor_names.end()) throw Error("no scores for factor '" + std::string(factor) + "'");
  return values.col(it - factor_names.begin());
}

Eigen::MatrixXd bartlett_weights(const Eigen::MatrixXd& lambda, const Eigen::VectorXd& theta) {
  if (theta.size() != lambda.rows()) throw ModelError("bartlett_weights: theta length must equal item count");
  if ((theta.array() <= 0.0).any()) throw NumericError("bartlett_weights: residual variances must be positive");
  const Eigen::MatrixXd lt_inv = lambda.transpose() * theta.cwiseInverse().asDiagonal();
  const auto llt = factor_gamma(lt_inv * lambda);
  return llt.solve(lt_inv);
}

Eigen::MatrixXd gls_bartlett_weights(const Eigen::MatrixXd& lambda, const Eigen::MatrixXd& error_cov) {
  Eigen::LLT<Eigen::MatrixXd> omega(error_cov);
  if (omega.info() != Eigen::Success) throw NumericError("error covariance is not positive definite");
  const Eigen::MatrixXd lt_inv = omega.solve(lambda).transpose();
  const auto llt = factor_gamma(lt_inv * lambda);
  return llt.solve(lt_inv);
}

Eigen::MatrixXd bartlett_error_covariance(const Eigen::MatrixXd& lambda, const Eigen::VectorXd& theta) {
  if ((theta.array() <= 0.0).any()) throw NumericError("residual variances must be positive");
  const Eigen::MatrixXd gamma = lambda.transpose() * theta.cwiseInverse().asDiagonal() * lambda;
  const auto llt = factor_gamma(gamma);
  return llt.solve(Eigen::MatrixXd::Identity(gamma.rows(), gamma.cols()));
}

ScoringWeights scoring_weights(const FittedModel& fit, ScoreMethod method) {
  const auto& mm = fit.estimates;
  const auto exo = fit.exogenous();
  const Eigen::MatrixXd a = mm.total_effects();
  const Eigen::MatrixXd reduced = mm.lambda * a;  // items x all disturbances

  ScoringWeights out;
  out.loadings.resize(mm.lambda.rows(), static_cast<Eigen::Index>(exo.size()));
  for (std::size_t k = 0; k < exo.size(); ++k) {
    out.loadings.col(k) = reduced.col(exo[k]);
    out.factors.push_back(fit.factors[exo[k]]);
  }

  if (method == ScoreMethod::Regression) {
    const Eigen::MatrixXd phi = mm.factor_covariance();
    const Eigen::MatrixXd sigma = mm.implied();
    Eigen::MatrixXd cov_fx(exo.size(), mm.lambda.rows());
    for (std::size_t k = 0; k < exo.size(); ++k) cov_fx.row(k) = phi.row(exo[k]) * mm.lambda.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw NumericError("implied covariance is not positive definite");
    out.weights = llt.solve(cov_fx.transpose()).transpose();
    return out;
  }

  const bool flat = exo.size() == fit.factors.size();
  if (flat) {
    out.weights = bartlett_weights(out.loadings, mm.theta);
    return out;
  }
  // Error term: everything except the top factors.
  Eigen::MatrixXd psi_rest = mm.psi;
  for (auto i : exo)
    for (auto j : exo) psi_rest(i, j) = 0.0;
  Eigen::MatrixXd omega = reduced * psi_rest * reduced.transpose();
  omega.diagonal() += mm.theta;
  out.weights = gls_bartlett_weights(out.loadings, Eigen::MatrixXd((omega + omega.transpose()) * 0.5));
  return out;
}

FactorScores compute_scores(const FittedModel& fit, const DataMatrix& data, ScoreMethod method) {
  if (!fit.converged())
    throw Error("cannot score from a fit with status " + std::string(to_string(fit.status)));
  const DataMatrix items = data.select(fit.observed);
  const ScoringWeights w = scoring_weights(fit, method);
  FactorScores scores;
  scores.values = center_columns(items.values()) * w.weights.transpose();
  scores.factor_names = w.factors;
  scores.method = method;
  scores.source_fit = std::make_shared<const FittedModel>(fit);
  return scores;
}

}  // namespace seqcfa
