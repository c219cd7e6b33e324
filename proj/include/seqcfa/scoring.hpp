#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "seqcfa/data.hpp"
#include "seqcfa/estimator.hpp"

namespace seqcfa {

enum class ScoreMethod { Bartlett, Regression };

std::string_view to_string(ScoreMethod method);
ScoreMethod score_method_from_string(std::string_view text);

struct FactorScores {
  Eigen::MatrixXd values;  // n_obs x factors
  std::vector<std::string> factor_names;
  ScoreMethod method = ScoreMethod::Bartlett;
  std::shared_ptr<const FittedModel> source_fit;

  Eigen::VectorXd column(std::string_view factor) const;
};

/// W = (L' Theta^-1 L)^-1 L' Theta^-1 for diagonal Theta. Throws NumericError
/// when Theta has non-positive entries or Gamma = L' Theta^-1 L is singular.
Eigen::MatrixXd bartlett_weights(const Eigen::MatrixXd& lambda, const Eigen::VectorXd& theta);

/// Generalized (GLS) Bartlett weights for a full error covariance Omega.
Eigen::MatrixXd gls_bartlett_weights(const Eigen::MatrixXd& lambda, const Eigen::MatrixXd& error_cov);

/// Gamma^-1 = (L' Theta^-1 L)^-1: covariance of Bartlett score errors.
Eigen::MatrixXd bartlett_error_covariance(const Eigen::MatrixXd& lambda, const Eigen::VectorXd& theta);

/// Weights mapping centered items to scores for a fit's top (exogenous) factors.
///
/// For a flat fit the loadings are the item loadings and the error covariance
/// is Theta. For a hierarchical fit the top factors reach the items through
/// Lambda (I-B)^-1; lower-order disturbances join Theta in the error term.
struct ScoringWeights {
  Eigen::MatrixXd weights;   // factors x items
  Eigen::MatrixXd loadings;  // items x factors, reduced-form loadings of the scored factors
  std::vector<std::string> factors;
};

ScoringWeights scoring_weights(const FittedModel& fit, ScoreMethod method = ScoreMethod::Bartlett);

/// Scores the fit's top factors on `data` (centered with its own means).
/// Throws Error if the fit did not converge, DataError on missing columns.
FactorScores compute_scores(const FittedModel& fit, const DataMatrix& data,
                            ScoreMethod method = ScoreMethod::Bartlett);

}  // namespace seqcfa
