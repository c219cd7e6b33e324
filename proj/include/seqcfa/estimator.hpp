#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

#include "seqcfa/data.hpp"
#include "seqcfa/model_spec.hpp"

namespace seqcfa {

enum class FitStatus { Converged, NonConverged, Inadmissible };

std::string_view to_string(FitStatus status);
FitStatus fit_status_from_string(std::string_view text);

/// How the latent scale is fixed.
enum class Identification {
  /// Exogenous factor variances and endogenous disturbance variances fixed to 1,
  /// all loadings free.
  UnitVariance,
  /// First loading of every factor fixed to 1, (co)variances free.
  MarkerLoading,
};

struct FitOptions {
  int max_iter = 500;
  double tol_grad = 1e-6;
  double tol_f = 1e-9;
  /// Report standardized estimates in serialized output.
  bool standardize = false;
  Identification identification = Identification::UnitVariance;
};

/// Parses `key = value` lines (max_iter, tol_grad, tol_f, standardize,
/// identification). `#` starts a comment. Unknown keys throw Error.
FitOptions parse_fit_options(std::string_view text, FitOptions base = {});

/// Parameter matrices of the all-factor model
///   eta = B eta + zeta,  x = Lambda eta + eps,
///   Sigma = Lambda (I-B)^-1 Psi (I-B)^-T Lambda' + Theta.
/// beta(i, j) is the loading of factor i on factor j (i is an indicator of j).
struct ModelMatrices {
  Eigen::MatrixXd lambda;  // observed x factors
  Eigen::MatrixXd beta;    // factors x factors
  Eigen::MatrixXd psi;     // exogenous (co)variances and endogenous disturbance variances
  Eigen::VectorXd theta;   // residual variances (diagonal of Theta)

  /// (I-B)^-1
  Eigen::MatrixXd total_effects() const;
  /// Covariance of all factors, (I-B)^-1 Psi (I-B)^-T.
  Eigen::MatrixXd factor_covariance() const;
  Eigen::MatrixXd implied() const;
};

/// Lambda Psi Lambda' + Theta. Throws ModelError on non-conformable inputs.
Eigen::MatrixXd implied_covariance(const Eigen::MatrixXd& lambda, const Eigen::MatrixXd& psi,
                                   const Eigen::MatrixXd& theta);
Eigen::MatrixXd implied_covariance(const Eigen::MatrixXd& lambda, const Eigen::MatrixXd& psi,
                                   const Eigen::VectorXd& theta_diag);

/// ML fit function ln|Sigma| + tr(S Sigma^-1) - ln|S| - p.
/// Throws NumericError when either matrix is not positive definite.
double ml_discrepancy(const Eigen::MatrixXd& sample_cov, const Eigen::MatrixXd& implied_cov, int p);

struct FittedModel {
  ModelSpec spec;
  std::vector<std::string> observed;  // rows of lambda, in spec variable order
  std::vector<std::string> factors;   // columns of lambda, by level
  std::vector<int> factor_levels;
  ModelMatrices estimates;
  Eigen::MatrixXd sample_cov;
  Identification identification = Identification::UnitVariance;

  FitStatus status = FitStatus::NonConverged;
  double chi_square = 0.0;
  int df = 0;
  int n_obs = 0;
  double discrepancy = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::string message;

  bool converged() const noexcept { return status == FitStatus::Converged; }
  /// Indices of factors with no parent.
  std::vector<Eigen::Index> exogenous() const;
  std::vector<std::string> top_factors() const;
  Eigen::Index factor_index(std::string_view name) const;
};

/// Standardized estimates: loadings scaled by sd(factor)/sd(indicator).
struct StandardizedSolution {
  Eigen::MatrixXd lambda;
  Eigen::MatrixXd beta;
  Eigen::VectorXd theta;
  Eigen::MatrixXd factor_correlation;
};

StandardizedSolution standardize(const FittedModel& fit);

/// Flat (single-level, possibly correlated-factors) CFA.
FittedModel fit_cfa(const ModelSpec& spec, const DataMatrix& data, const FitOptions& options = {});

/// Simultaneous estimation of every level of a hierarchical model.
FittedModel fit_traditional(const ModelSpec& spec, const DataMatrix& data, const FitOptions& options = {});

/// Baseline model with only residual variances (diag of S).
FittedModel fit_independence(const Eigen::MatrixXd& sample_cov, int n_obs,
                             const std::vector<std::string>& observed);

/// The ML problem over an unconstrained parameter vector: residual variances
/// are log-transformed, exogenous correlations tanh-bounded (UnitVariance) or
/// Cholesky-parameterized (MarkerLoading).
class MlProblem {
 public:
  MlProblem(const ModelSpec& spec, Eigen::MatrixXd sample_cov, Identification identification);

  Eigen::Index dimension() const noexcept { return n_free_; }
  int degrees_of_freedom() const;
  const std::vector<std::string>& observed() const noexcept { return observed_; }
  const std::vector<std::string>& factors() const noexcept { return factors_; }
  const std::vector<int>& factor_levels() const noexcept { return levels_; }

  Eigen::VectorXd start_values() const;
  ModelMatrices unpack(const Eigen::VectorXd& x) const;
  /// Discrepancy at x, +inf if the implied covariance is not positive definite.
  double value(const Eigen::VectorXd& x) const;
  /// Analytic gradient with respect to x.
  double value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const;

 private:
  struct Loading {
    Eigen::Index row;
    Eigen::Index col;
    Eigen::Index param;  // -1 when fixed
    double fixed;
  };

  std::vector<std::string> observed_;
  std::vector<std::string> factors_;
  std::vector<int> levels_;
  std::vector<Eigen::Index> exo_;
  std::vector<Eigen::Index> endo_;
  std::vector<Loading> lambda_pattern_;
  std::vector<Loading> beta_pattern_;
  Eigen::Index theta_offset_ = 0;
  Eigen::Index cov_offset_ = 0;
  Eigen::Index n_free_ = 0;
  Identification ident_;
  Eigen::MatrixXd s_;
  double logdet_s_ = 0.0;
};

}  // namespace seqcfa
