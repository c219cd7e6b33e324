#include "seqcfa/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "seqcfa/error.hpp"

namespace seqcfa {

std::string_view to_string(Design d) {
  switch (d) {
    case Design::Simple: return "simple";
    case Design::Complex: return "complex";
    case Design::MostComplex: return "most-complex";
    case Design::Custom: return "custom";
  }
  return "custom";
}

std::string_view to_string(Distribution d) { return d == Distribution::Normal ? "Normal" : "Skewed"; }

std::string_view to_string(ResidualPattern r) {
  return r == ResidualPattern::Homoskedastic ? "Homoskedastic" : "Heteroskedastic";
}

Design design_from_string(std::string_view text) {
  if (text == "simple" || text == "Simple") return Design::Simple;
  if (text == "complex" || text == "Complex") return Design::Complex;
  if (text == "most-complex" || text == "MostComplex" || text == "most_complex") return Design::MostComplex;
  if (text == "custom" || text == "Custom") return Design::Custom;
  throw Error("unknown design '" + std::string(text) + "'");
}

Distribution distribution_from_string(std::string_view text) {
  if (text == "Normal" || text == "normal") return Distribution::Normal;
  if (text == "Skewed" || text == "skewed") return Distribution::Skewed;
  throw Error("unknown distribution '" + std::string(text) + "'");
}

ResidualPattern residual_pattern_from_string(std::string_view text) {
  if (text == "Homoskedastic" || text == "homoskedastic") return ResidualPattern::Homoskedastic;
  if (text == "Heteroskedastic" || text == "heteroskedastic") return ResidualPattern::Heteroskedastic;
  throw Error("unknown residual pattern '" + std::string(text) + "'");
}

void SimCondition::validate() const {
  if (n_obs < 2) throw Error("simulation needs n_obs >= 2");
  if (!(error_level > 0.0 && error_level < 1.0)) throw Error("error_level must lie in (0, 1)");
  if (cross_loading != 0.0 && design != Design::MostComplex)
    throw Error("cross-loadings are only defined for the most-complex design");
  if (design == Design::Custom && !custom_spec) throw Error("custom design needs a model spec");
}

ModelSpec builtin_design(Design design) {
  switch (design) {
    case Design::Simple:
      return parse_model(
          "F1 =~ V1 + V2\n"
          "F2 =~ V3 + V4\n"
          "F3 =~ V5 + V6\n"
          "G =~ F1 + F2 + F3\n");
    case Design::Complex:
      return parse_model(
          "F1 =~ V1 + V2 + V3\n"
          "F2 =~ V4 + V5 + V6\n"
          "F3 =~ V7 + V8 + V9\n"
          "F4 =~ V10 + V11 + V12\n"
          "G =~ F1 + F2 + F3 + F4\n");
    case Design::MostComplex:
      return parse_model(
          "F1 =~ V1 + V2 + V3\n"
          "F2 =~ V4 + V5 + V6\n"
          "F3 =~ V7 + V8 + V9\n"
          "F4 =~ V10 + V11 + V12\n"
          "F5 =~ V13 + V14 + V15\n"
          "G1 =~ F1 + F2\n"
          "G2 =~ F3 + F4\n"
          "H =~ G1 + G2 + F5\n");
    case Design::Custom: break;
  }
  throw Error("custom designs have no built-in specification");
}

Eigen::VectorXd heteroskedastic_ramp(Eigen::Index n_items) {
  Eigen::VectorXd ramp(n_items);
  for (Eigen::Index i = 0; i < n_items; ++i)
    ramp(i) = n_items > 1 ? 0.7 + 0.6 * static_cast<double>(i) / static_cast<double>(n_items - 1) : 1.0;
  return ramp / std::sqrt(ramp.squaredNorm() / static_cast<double>(n_items));
}

GeneratingParams generating_parameters(const SimCondition& condition) {
  condition.validate();
  GeneratingParams gp;
  gp.spec = condition.design == Design::Custom ? *condition.custom_spec : builtin_design(condition.design);
  gp.items = gp.spec.variable_names();
  gp.factors = gp.spec.factors_by_level();
  gp.item_loading = std::sqrt(1.0 - condition.error_level);

  const auto p = static_cast<Eigen::Index>(gp.items.size());
  const auto m = static_cast<Eigen::Index>(gp.factors.size());
  auto fidx = [&](const std::string& name) {
    return static_cast<Eigen::Index>(std::find(gp.factors.begin(), gp.factors.end(), name) - gp.factors.begin());
  };
  auto iidx = [&](const std::string& name) {
    return static_cast<Eigen::Index>(std::find(gp.items.begin(), gp.items.end(), name) - gp.items.begin());
  };

  ModelMatrices& t = gp.truth;
  t.lambda = Eigen::MatrixXd::Zero(p, m);
  t.beta = Eigen::MatrixXd::Zero(m, m);
  t.psi = Eigen::MatrixXd::Zero(m, m);
  t.theta = Eigen::VectorXd::Zero(p);

  std::vector<std::vector<Eigen::Index>> parents(m);
  std::vector<std::vector<Eigen::Index>> item_factors(p);
  for (const auto& def : gp.spec.factors()) {
    const auto j = fidx(def.name);
    for (const auto& ind : def.indicators) {
      if (gp.spec.is_factor(ind))
        parents[fidx(ind)].push_back(j);
      else
        item_factors[iidx(ind)].push_back(j);
    }
  }

  // Top-down: every factor ends up with unit variance.
  for (int level = gp.spec.levels(); level >= 1; --level) {
    const Eigen::MatrixXd cov = t.factor_covariance();
    for (const auto& name : gp.spec.factors_at_level(level)) {
      const auto j = fidx(name);
      if (parents[j].empty()) {
        t.psi(j, j) = 1.0;
        continue;
      }
      double parent_var = 0.0;
      for (auto a : parents[j])
        for (auto b : parents[j]) parent_var += cov(a, b);
      double c = gp.factor_loading;
      if (c * c * parent_var > 0.99) c = gp.factor_loading / std::sqrt(parent_var);
      for (auto a : parents[j]) t.beta(j, a) = c;
      t.psi(j, j) = 1.0 - c * c * parent_var;
    }
  }

  const Eigen::MatrixXd phi = t.factor_covariance();
  for (Eigen::Index i = 0; i < p; ++i) {
    double common = 0.0;
    for (auto a : item_factors[i])
      for (auto b : item_factors[i]) common += phi(a, b);
    const double loading = std::sqrt((1.0 - condition.error_level) / common);
    for (auto a : item_factors[i]) t.lambda(i, a) = loading;
  }

  if (condition.cross_loading != 0.0) {
    const auto first_order = gp.spec.factors_at_level(1);
    for (std::size_t k = 0; k < first_order.size(); ++k) {
      const auto& def = gp.spec.factor(first_order[k]);
      const auto& target = first_order[(k + 1) % first_order.size()];
      const auto& item = def.indicators.front();
      t.lambda(iidx(item), fidx(target)) += condition.cross_loading;
      gp.cross_loadings.emplace_back(item, target);
    }
  }

  gp.residual_sd = Eigen::VectorXd::Constant(p, std::sqrt(condition.error_level));
  if (condition.residual_pattern == ResidualPattern::Heteroskedastic)
    gp.residual_sd = gp.residual_sd.cwiseProduct(heteroskedastic_ramp(p));
  t.theta = gp.residual_sd.cwiseAbs2();
  return gp;
}

Eigen::VectorXd SimulatedDataset::latent(std::string_view factor) const {
  for (const auto& [level, block] : true_latents) {
    auto it = std::find(block.names.begin(), block.names.end(), factor);
    if (it != block.names.end()) return block.values.col(it - block.names.begin());
  }
  throw Error("no latent named '" + std::string(factor) + "'");
}

SimulatedDataset generate(const SimCondition& condition) {
  GeneratingParams gp = generating_parameters(condition);
  const Eigen::Index n = condition.n_obs;
  const auto p = static_cast<Eigen::Index>(gp.items.size());
  const auto m = static_cast<Eigen::Index>(gp.factors.size());
  const auto& t = gp.truth;

  std::mt19937_64 rng(condition.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::chi_squared_distribution<double> chisq(2.0);
  // chi-square(2): mean 2, variance 4, skewness 2.
  auto skewed = [&] { return (chisq(rng) - 2.0) / 2.0; };

  Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(n, m);
  for (Eigen::Index j = m - 1; j >= 0; --j) {
    const bool exogenous = t.beta.row(j).isZero(0.0);
    Eigen::VectorXd col(n);
    for (Eigen::Index r = 0; r < n; ++r)
      col(r) = exogenous && condition.distribution == Distribution::Skewed ? skewed() : normal(rng);
    eta.col(j) = col * std::sqrt(t.psi(j, j));
    for (Eigen::Index a = j + 1; a < m; ++a)
      if (t.beta(j, a) != 0.0) eta.col(j) += t.beta(j, a) * eta.col(a);
  }

  Eigen::MatrixXd x = eta * t.lambda.transpose();
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index r = 0; r < n; ++r)
      x(r, i) += gp.residual_sd(i) * (condition.skew_residuals ? skewed() : normal(rng));

  SimulatedDataset ds{DataMatrix(std::move(x), gp.items), {}, condition, gp};
  for (int level = 1; level <= gp.spec.levels(); ++level) {
    LatentBlock block;
    block.names = gp.spec.factors_at_level(level);
    block.values.resize(n, static_cast<Eigen::Index>(block.names.size()));
    for (std::size_t k = 0; k < block.names.size(); ++k) {
      const auto j = std::find(gp.factors.begin(), gp.factors.end(), block.names[k]) - gp.factors.begin();
      block.values.col(static_cast<Eigen::Index>(k)) = eta.col(j);
    }
    ds.true_latents.emplace(level, std::move(block));
  }
  return ds;
}

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t grid_seed, std::uint64_t condition_index, std::uint64_t rep) {
  return splitmix64(splitmix64(splitmix64(grid_seed) ^ condition_index) ^ rep);
}

}  // namespace seqcfa
