#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seqcfa/data.hpp"
#include "seqcfa/estimator.hpp"
#include "seqcfa/model_spec.hpp"

namespace seqcfa {

enum class Design { Simple, Complex, MostComplex, Custom };
enum class Distribution { Normal, Skewed };
enum class ResidualPattern { Homoskedastic, Heteroskedastic };

std::string_view to_string(Design d);
std::string_view to_string(Distribution d);
std::string_view to_string(ResidualPattern r);
/// Accepts "simple", "complex", "most-complex" (and the enum spellings).
Design design_from_string(std::string_view text);
Distribution distribution_from_string(std::string_view text);
ResidualPattern residual_pattern_from_string(std::string_view text);

/// One cell of the simulation grid.
struct SimCondition {
  Design design = Design::Simple;
  std::optional<ModelSpec> custom_spec;  // required iff design == Custom
  int n_obs = 100;
  /// Share of item variance that is residual; must lie in (0, 1).
  double error_level = 0.2;
  Distribution distribution = Distribution::Normal;
  ResidualPattern residual_pattern = ResidualPattern::Homoskedastic;
  double cross_loading = 0.0;
  std::uint64_t seed = 0;
  /// Also draw residuals from the standardized chi-square.
  bool skew_residuals = false;

  /// Throws Error on an invalid combination.
  void validate() const;
};

/// Loading between a factor and its parent factor(s).
inline constexpr double kFactorLoading = 0.7;

/// Built-in designs. Level-1 factors are F1.., item names V1..
ModelSpec builtin_design(Design design);

/// Population parameters used by generate(), in the estimator's matrix form.
struct GeneratingParams {
  ModelSpec spec;
  std::vector<std::string> items;
  std::vector<std::string> factors;  // by level
  ModelMatrices truth;               // psi holds disturbance variances
  Eigen::VectorXd residual_sd;
  double factor_loading = kFactorLoading;
  double item_loading = 0.0;  // sqrt(1 - error_level) for single-factor items
  /// (item, factor) pairs that carry the cross-loading.
  std::vector<std::pair<std::string, std::string>> cross_loadings;

  Eigen::MatrixXd implied_covariance() const { return truth.implied(); }
};

GeneratingParams generating_parameters(const SimCondition& condition);

/// Factor realizations at one level, columns named by factor.
struct LatentBlock {
  std::vector<std::string> names;
  Eigen::MatrixXd values;
};

struct SimulatedDataset {
  DataMatrix data;
  std::map<int, LatentBlock> true_latents;
  SimCondition condition;
  GeneratingParams params;

  /// Realization of a named factor at any level.
  Eigen::VectorXd latent(std::string_view factor) const;
};

SimulatedDataset generate(const SimCondition& condition);

/// Residual sd multipliers for the heteroskedastic pattern: a linear ramp from
/// 0.7 to 1.3 over item index, rescaled so the mean squared multiplier is 1.
Eigen::VectorXd heteroskedastic_ramp(Eigen::Index n_items);

/// Per-replication seed: a SplitMix64 chain over (grid seed, condition, rep).
std::uint64_t derive_seed(std::uint64_t grid_seed, std::uint64_t condition_index, std::uint64_t rep);

}  // namespace seqcfa
