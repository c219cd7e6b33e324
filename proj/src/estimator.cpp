#include "seqcfa/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "seqcfa/error.hpp"
#include "seqcfa/optimizer.hpp"

namespace seqcfa {

namespace {

// Admissibility thresholds applied after convergence. Log-variance and tanh
// parameterizations can only approach the Heywood boundary, never cross it.
constexpr double kMinResidualShare = 1e-3;
constexpr double kMaxCorrelation = 0.999;
constexpr double kMinDisturbanceShare = 1e-3;

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double log_det_pd(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

std::string_view to_string(FitStatus status) {
  switch (status) {
    case FitStatus::Converged: return "Converged";
    case FitStatus::NonConverged: return "NonConverged";
    case FitStatus::Inadmissible: return "Inadmissible";
  }
  return "NonConverged";
}

FitStatus fit_status_from_string(std::string_view text) {
  if (text == "Converged") return FitStatus::Converged;
  if (text == "NonConverged") return FitStatus::NonConverged;
  if (text == "Inadmissible") return FitStatus::Inadmissible;
  throw Error("unknown fit status '" + std::string(text) + "'");
}

FitOptions parse_fit_options(std::string_view text, FitOptions opts) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    try {
      if (key == "max_iter") {
        opts.max_iter = std::stoi(value);
        if (opts.max_iter < 1) throw Error("max_iter must be positive");
      } else if (key == "tol_grad") {
        opts.tol_grad = std::stod(value);
      } else if (key == "tol_f") {
        opts.tol_f = std::stod(value);
      } else if (key == "standardize") {
        if (value == "true" || value == "1" || value == "yes") opts.standardize = true;
        else if (value == "false" || value == "0" || value == "no") opts.standardize = false;
        else throw Error("standardize expects a boolean");
      } else if (key == "identification") {
        if (value == "unit_variance") opts.identification = Identification::UnitVariance;
        else if (value == "marker") opts.identification = Identification::MarkerLoading;
        else throw Error("identification expects unit_variance or marker");
      } else {
        throw Error("unknown option '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw Error("config line " + std::to_string(line_no) + ": bad value for '" + key + "'");
    }
  }
  return opts;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd ModelMatrices::total_effects() const {
  const Eigen::Index m = beta.rows();
  const Eigen::MatrixXd i_minus_b = Eigen::MatrixXd::Identity(m, m) - beta;
  // Factors are ordered by level and beta(child, parent) has child < parent,
  // so I - B is unit upper triangular.
  return i_minus_b.triangularView<Eigen::UnitUpper>().solve(Eigen::MatrixXd::Identity(m, m));
}

Eigen::MatrixXd ModelMatrices::factor_covariance() const {
  const Eigen::MatrixXd a = total_effects();
  return a * psi * a.transpose();
}

Eigen::MatrixXd ModelMatrices::implied() const {
  return implied_covariance(lambda, factor_covariance(), theta);
}

Eigen::MatrixXd implied_covariance(const Eigen::MatrixXd& lambda, const Eigen::MatrixXd& psi,
                                   const Eigen::MatrixXd& theta) {
  if (psi.rows() != psi.cols() || lambda.cols() != psi.rows() || theta.rows() != lambda.rows() ||
      theta.cols() != lambda.rows())
    throw ModelError("implied_covariance: non-conformable lambda, psi, theta");
  Eigen::MatrixXd sigma = lambda * psi * lambda.transpose() + theta;
  return (sigma + sigma.transpose()) * 0.5;
}

Eigen::MatrixXd implied_covariance(const Eigen::MatrixXd& lambda, const Eigen::MatrixXd& psi,
                                   const Eigen::VectorXd& theta_diag) {
  if (theta_diag.size() != lambda.rows())
    throw ModelError("implied_covariance: theta length does not match lambda rows");
  return implied_covariance(lambda, psi, Eigen::MatrixXd(theta_diag.asDiagonal()));
}

double ml_discrepancy(const Eigen::MatrixXd& sample_cov, const Eigen::MatrixXd& implied_cov, int p) {
  if (sample_cov.rows() != p || sample_cov.cols() != p || implied_cov.rows() != p || implied_cov.cols() != p)
    throw ModelError("ml_discrepancy: matrices must be p x p");
  Eigen::LLT<Eigen::MatrixXd> llt_s(sample_cov);
  if (llt_s.info() != Eigen::Success) throw NumericError("sample covariance is not positive definite");
  Eigen::LLT<Eigen::MatrixXd> llt_sigma(implied_cov);
  if (llt_sigma.info() != Eigen::Success) throw NumericError("implied covariance is not positive definite");
  const double trace = llt_sigma.solve(sample_cov).trace();
  return log_det_pd(llt_sigma) + trace - log_det_pd(llt_s) - p;
}

// ---------------------------------------------------------------------------

std::vector<Eigen::Index> FittedModel::exogenous() const {
  std::vector<Eigen::Index> out;
  const auto& b = estimates.beta;
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    bool has_parent = false;
    for (const auto& f : spec.factors())
      for (const auto& ind : f.indicators)
        if (ind == factors[j]) has_parent = true;
    if (!has_parent) out.push_back(j);
  }
  return out;
}

std::vector<std::string> FittedModel::top_factors() const {
  std::vector<std::string> out;
  for (auto j : exogenous()) out.push_back(factors[j]);
  return out;
}

Eigen::Index FittedModel::factor_index(std::string_view name) const {
  auto it = std::find(factors.begin(), factors.end(), name);
  if (it == factors.end()) throw ModelError("fit has no factor '" + std::string(name) + "'");
  return it - factors.begin();
}

StandardizedSolution standardize(const FittedModel& fit) {
  StandardizedSolution out;
  const Eigen::MatrixXd phi = fit.estimates.factor_covariance();
  const Eigen::MatrixXd sigma = fit.estimates.implied();
  const Eigen::VectorXd sd_f = phi.diagonal().cwiseMax(0.0).cwiseSqrt();
  const Eigen::VectorXd sd_x = sigma.diagonal().cwiseSqrt();
  out.lambda = sd_x.cwiseInverse().asDiagonal() * fit.estimates.lambda * sd_f.asDiagonal();
  const Eigen::VectorXd inv_f = sd_f.unaryExpr([](double v) { return v > 0 ? 1.0 / v : 0.0; });
  out.beta = inv_f.asDiagonal() * fit.estimates.beta * sd_f.asDiagonal();
  out.theta = fit.estimates.theta.cwiseQuotient(sigma.diagonal());
  out.factor_correlation = inv_f.asDiagonal() * phi * inv_f.asDiagonal();
  return out;
}

// ---------------------------------------------------------------------------

MlProblem::MlProblem(const ModelSpec& spec, Eigen::MatrixXd sample_cov, Identification identification)
    : observed_(spec.variable_names()), factors_(spec.factors_by_level()), ident_(identification),
      s_(std::move(sample_cov)) {
  const auto p = static_cast<Eigen::Index>(observed_.size());
  if (s_.rows() != p || s_.cols() != p) throw ModelError("sample covariance does not match model items");

  std::map<std::string, Eigen::Index> item_idx, factor_idx;
  for (Eigen::Index i = 0; i < p; ++i) item_idx[observed_[i]] = i;
  for (std::size_t j = 0; j < factors_.size(); ++j) {
    factor_idx[factors_[j]] = static_cast<Eigen::Index>(j);
    levels_.push_back(spec.level_of(factors_[j]));
  }

  std::set<Eigen::Index> has_parent;
  Eigen::Index next = 0;
  for (std::size_t j = 0; j < factors_.size(); ++j) {
    const auto& def = spec.factor(factors_[j]);
    const bool auto_marker = ident_ == Identification::MarkerLoading && def.fixed_loadings.empty();
    for (std::size_t k = 0; k < def.indicators.size(); ++k) {
      const auto& ind = def.indicators[k];
      Loading l{0, static_cast<Eigen::Index>(j), -1, 0.0};
      if (auto it = def.fixed_loadings.find(ind); it != def.fixed_loadings.end()) {
        l.fixed = it->second;
      } else if (auto_marker && k == 0) {
        l.fixed = 1.0;
      } else {
        l.param = next++;
      }
      if (auto fi = factor_idx.find(ind); fi != factor_idx.end()) {
        l.row = fi->second;
        has_parent.insert(fi->second);
        beta_pattern_.push_back(l);
      } else {
        l.row = item_idx.at(ind);
        lambda_pattern_.push_back(l);
      }
    }
  }
  // Loading parameters are numbered lambda-first for a stable layout.
  {
    Eigen::Index k = 0;
    for (auto& l : lambda_pattern_)
      if (l.param >= 0) l.param = k++;
    for (auto& l : beta_pattern_)
      if (l.param >= 0) l.param = k++;
  }
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(factors_.size()); ++j)
    (has_parent.count(j) ? endo_ : exo_).push_back(j);

  theta_offset_ = next;
  cov_offset_ = theta_offset_ + p;
  const auto k = static_cast<Eigen::Index>(exo_.size());
  if (ident_ == Identification::UnitVariance)
    n_free_ = cov_offset_ + k * (k - 1) / 2;
  else
    n_free_ = cov_offset_ + k * (k + 1) / 2 + static_cast<Eigen::Index>(endo_.size());

  Eigen::LLT<Eigen::MatrixXd> llt(s_);
  logdet_s_ = llt.info() == Eigen::Success ? log_det_pd(llt) : std::numeric_limits<double>::quiet_NaN();
}

int MlProblem::degrees_of_freedom() const {
  const auto p = static_cast<int>(observed_.size());
  return p * (p + 1) / 2 - static_cast<int>(n_free_);
}

Eigen::VectorXd MlProblem::start_values() const {
  Eigen::VectorXd x(n_free_);
  const Eigen::VectorXd sd = s_.diagonal().cwiseSqrt();
  const bool unit = ident_ == Identification::UnitVariance;

  // Marker scaling: per factor, the sd of its fixed marker item (if any).
  std::vector<double> marker_sd(factors_.size(), 1.0);
  for (const auto& l : lambda_pattern_)
    if (l.param < 0 && l.fixed != 0.0) marker_sd[l.col] = sd(l.row) * std::abs(l.fixed);

  for (const auto& l : lambda_pattern_)
    if (l.param >= 0) x(l.param) = unit ? 0.7 * sd(l.row) : sd(l.row) / marker_sd[l.col];
  for (const auto& l : beta_pattern_)
    if (l.param >= 0) x(l.param) = unit ? 0.7 : 1.0;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(observed_.size()); ++i)
    x(theta_offset_ + i) = std::log(0.5 * s_(i, i));

  const auto k = static_cast<Eigen::Index>(exo_.size());
  if (unit) {
    for (Eigen::Index i = 0; i < k * (k - 1) / 2; ++i) x(cov_offset_ + i) = std::atanh(0.3);
  } else {
    Eigen::MatrixXd psi0(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = 0; b < k; ++b) {
        const double va = 0.5 * marker_sd[exo_[a]] * marker_sd[exo_[a]];
        const double vb = 0.5 * marker_sd[exo_[b]] * marker_sd[exo_[b]];
        psi0(a, b) = a == b ? va : 0.3 * std::sqrt(va * vb);
      }
    const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(psi0).matrixL();
    Eigen::Index pos = cov_offset_;
    for (Eigen::Index r = 0; r < k; ++r)
      for (Eigen::Index c = 0; c <= r; ++c) x(pos++) = r == c ? std::log(chol(r, r)) : chol(r, c);
    for (std::size_t e = 0; e < endo_.size(); ++e) x(pos++) = std::log(0.5);
  }
  return x;
}

ModelMatrices MlProblem::unpack(const Eigen::VectorXd& x) const {
  const auto p = static_cast<Eigen::Index>(observed_.size());
  const auto m = static_cast<Eigen::Index>(factors_.size());
  ModelMatrices mm;
  mm.lambda = Eigen::MatrixXd::Zero(p, m);
  mm.beta = Eigen::MatrixXd::Zero(m, m);
  mm.psi = Eigen::MatrixXd::Zero(m, m);
  for (const auto& l : lambda_pattern_) mm.lambda(l.row, l.col) = l.param >= 0 ? x(l.param) : l.fixed;
  for (const auto& l : beta_pattern_) mm.beta(l.row, l.col) = l.param >= 0 ? x(l.param) : l.fixed;
  mm.theta = x.segment(theta_offset_, p).array().exp();

  const auto k = static_cast<Eigen::Index>(exo_.size());
  if (ident_ == Identification::UnitVariance) {
    for (auto j : exo_) mm.psi(j, j) = 1.0;
    for (auto j : endo_) mm.psi(j, j) = 1.0;
    Eigen::Index pos = cov_offset_;
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = a + 1; b < k; ++b) {
        const double r = std::tanh(x(pos++));
        mm.psi(exo_[a], exo_[b]) = mm.psi(exo_[b], exo_[a]) = r;
      }
  } else {
    Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(k, k);
    Eigen::Index pos = cov_offset_;
    for (Eigen::Index r = 0; r < k; ++r)
      for (Eigen::Index c = 0; c <= r; ++c) chol(r, c) = r == c ? std::exp(x(pos++)) : x(pos++);
    const Eigen::MatrixXd exo_cov = chol * chol.transpose();
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = 0; b < k; ++b) mm.psi(exo_[a], exo_[b]) = exo_cov(a, b);
    for (auto j : endo_) mm.psi(j, j) = std::exp(x(pos++));
  }
  return mm;
}

double MlProblem::value(const Eigen::VectorXd& x) const {
  Eigen::VectorXd unused;
  return value_and_gradient(x, unused);
}

double MlProblem::value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
  const auto p = static_cast<Eigen::Index>(observed_.size());
  const ModelMatrices mm = unpack(x);
  const Eigen::MatrixXd a = mm.total_effects();
  const Eigen::MatrixXd phi = a * mm.psi * a.transpose();
  Eigen::MatrixXd sigma = mm.lambda * phi * mm.lambda.transpose();
  sigma.diagonal() += mm.theta;

  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success || !sigma.allFinite()) return std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd sigma_inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd sinv_s = sigma_inv * s_;
  const double f = log_det_pd(llt) + sinv_s.trace() - logdet_s_ - static_cast<double>(p);
  if (!std::isfinite(f)) return std::numeric_limits<double>::infinity();

  grad.resize(n_free_);
  grad.setZero();
  // dF = tr(G dSigma) with G = Sigma^-1 - Sigma^-1 S Sigma^-1.
  Eigen::MatrixXd g = sigma_inv - sinv_s * sigma_inv;
  g = (g + g.transpose()) * 0.5;
  const Eigen::MatrixXd d_lambda = 2.0 * g * mm.lambda * phi;
  const Eigen::MatrixXd k = mm.lambda.transpose() * g * mm.lambda;
  const Eigen::MatrixXd d_beta = 2.0 * a.transpose() * k * phi;
  const Eigen::MatrixXd d_psi = a.transpose() * k * a;

  for (const auto& l : lambda_pattern_)
    if (l.param >= 0) grad(l.param) = d_lambda(l.row, l.col);
  for (const auto& l : beta_pattern_)
    if (l.param >= 0) grad(l.param) = d_beta(l.row, l.col);
  for (Eigen::Index i = 0; i < p; ++i) grad(theta_offset_ + i) = g(i, i) * mm.theta(i);

  const auto ke = static_cast<Eigen::Index>(exo_.size());
  Eigen::Index pos = cov_offset_;
  if (ident_ == Identification::UnitVariance) {
    for (Eigen::Index i = 0; i < ke; ++i)
      for (Eigen::Index j = i + 1; j < ke; ++j) {
        const double r = mm.psi(exo_[i], exo_[j]);
        grad(pos++) = 2.0 * d_psi(exo_[i], exo_[j]) * (1.0 - r * r);
      }
  } else {
    Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(ke, ke);
    Eigen::MatrixXd h(ke, ke);
    {
      Eigen::Index q = cov_offset_;
      for (Eigen::Index r = 0; r < ke; ++r)
        for (Eigen::Index c = 0; c <= r; ++c) chol(r, c) = r == c ? std::exp(x(q++)) : x(q++);
      for (Eigen::Index r = 0; r < ke; ++r)
        for (Eigen::Index c = 0; c < ke; ++c) h(r, c) = d_psi(exo_[r], exo_[c]);
    }
    const Eigen::MatrixXd d_chol = 2.0 * h * chol;
    for (Eigen::Index r = 0; r < ke; ++r)
      for (Eigen::Index c = 0; c <= r; ++c) grad(pos++) = r == c ? d_chol(r, r) * chol(r, r) : d_chol(r, c);
    for (auto j : endo_) grad(pos++) = d_psi(j, j) * mm.psi(j, j);
  }
  return f;
}

// ---------------------------------------------------------------------------

namespace {

// Reflect factors so that each loading column (items and lower-order factors)
// sums non-negative. Bottom-up, because flipping a child changes its parent's
// column.
// Factors touching a fixed loading keep their orientation.
void apply_sign_convention(const ModelSpec& spec, const std::vector<std::string>& factors, ModelMatrices& mm) {
  const Eigen::Index m = mm.beta.rows();
  for (Eigen::Index j = 0; j < m; ++j) {
    bool pinned = !spec.factor(factors[j]).fixed_loadings.empty();
    for (const auto& f : spec.factors())
      if (f.fixed_loadings.count(factors[j])) pinned = true;
    if (pinned) continue;
    const double sum = mm.lambda.col(j).sum() + mm.beta.col(j).sum();
    if (sum >= 0.0) continue;
    mm.lambda.col(j) *= -1.0;
    mm.beta.col(j) *= -1.0;
    mm.beta.row(j) *= -1.0;
    mm.psi.row(j) *= -1.0;
    mm.psi.col(j) *= -1.0;
  }
}

std::string admissibility_problem(const FittedModel& fit, const std::vector<Eigen::Index>& endo) {
  const auto& mm = fit.estimates;
  for (Eigen::Index i = 0; i < mm.theta.size(); ++i) {
    if (!(mm.theta(i) > kMinResidualShare * fit.sample_cov(i, i)))
      return "Heywood case: residual variance of '" + fit.observed[i] + "' at boundary";
  }
  const Eigen::MatrixXd phi = mm.factor_covariance();
  const auto exo = fit.exogenous();
  for (std::size_t a = 0; a < exo.size(); ++a)
    for (std::size_t b = a + 1; b < exo.size(); ++b) {
      const double r = phi(exo[a], exo[b]) / std::sqrt(phi(exo[a], exo[a]) * phi(exo[b], exo[b]));
      if (!(std::abs(r) < kMaxCorrelation))
        return "factor correlation between '" + fit.factors[exo[a]] + "' and '" + fit.factors[exo[b]] +
               "' outside (-1, 1)";
    }
  if (!exo.empty()) {
    Eigen::MatrixXd exo_psi(exo.size(), exo.size());
    for (std::size_t a = 0; a < exo.size(); ++a)
      for (std::size_t b = 0; b < exo.size(); ++b) exo_psi(a, b) = mm.psi(exo[a], exo[b]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(exo_psi, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10) return "factor covariance matrix is not positive semi-definite";
  }
  for (auto j : endo) {
    if (!(mm.psi(j, j) > kMinDisturbanceShare * phi(j, j)))
      return "Heywood case: disturbance variance of '" + fit.factors[j] + "' at boundary";
  }
  return {};
}

FittedModel fit_model(const ModelSpec& spec, const DataMatrix& data, const FitOptions& options) {
  const DataMatrix selected = data.select(spec.variable_names());
  FittedModel fit;
  fit.spec = spec;
  fit.observed = spec.variable_names();
  fit.factors = spec.factors_by_level();
  fit.n_obs = static_cast<int>(data.n_obs());
  fit.identification = options.identification;
  fit.sample_cov = sample_covariance(selected);

  MlProblem problem(spec, fit.sample_cov, options.identification);
  fit.factor_levels = problem.factor_levels();
  fit.df = problem.degrees_of_freedom();
  if (fit.df < 0)
    throw ModelError("model is not identified: " + std::to_string(problem.dimension()) + " free parameters but only " +
                     std::to_string(problem.dimension() + fit.df) + " distinct covariances (df = " +
                     std::to_string(fit.df) + ")");

  if (Eigen::LLT<Eigen::MatrixXd>(fit.sample_cov).info() != Eigen::Success) {
    fit.status = FitStatus::NonConverged;
    fit.message = "sample covariance matrix is not positive definite (rank-deficient or too few observations)";
    return fit;
  }

  optim::QuasiNewtonOptions qn;
  qn.max_iter = options.max_iter;
  qn.tol_grad = options.tol_grad;
  qn.tol_f = options.tol_f;
  auto objective = [&problem](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    if (g) return problem.value_and_gradient(x, *g);
    return problem.value(x);
  };
  const auto result = optim::minimize_bfgs(objective, problem.start_values(), qn);

  fit.iterations = result.iterations;
  fit.gradient_norm = result.gradient.size() ? result.gradient.lpNorm<Eigen::Infinity>() : 0.0;
  fit.estimates = problem.unpack(result.x);
  if (options.identification == Identification::UnitVariance) apply_sign_convention(spec, fit.factors, fit.estimates);

  const auto p = static_cast<int>(fit.observed.size());
  try {
    fit.discrepancy = std::max(0.0, ml_discrepancy(fit.sample_cov, fit.estimates.implied(), p));
  } catch (const NumericError& e) {
    fit.status = FitStatus::NonConverged;
    fit.message = e.what();
    return fit;
  }
  fit.chi_square = (fit.n_obs - 1) * fit.discrepancy;

  if (!result.converged) {
    fit.status = FitStatus::NonConverged;
    fit.message = "optimizer stopped: " + result.reason;
    return fit;
  }
  std::vector<Eigen::Index> endo;
  {
    const auto exo = fit.exogenous();
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(fit.factors.size()); ++j)
      if (std::find(exo.begin(), exo.end(), j) == exo.end()) endo.push_back(j);
  }
  if (auto problem_text = admissibility_problem(fit, endo); !problem_text.empty()) {
    fit.status = FitStatus::Inadmissible;
    fit.message = problem_text;
    return fit;
  }
  fit.status = FitStatus::Converged;
  fit.message = result.reason;
  return fit;
}

}  // namespace

FittedModel fit_cfa(const ModelSpec& spec, const DataMatrix& data, const FitOptions& options) {
  if (spec.levels() != 1)
    throw ModelError("fit_cfa expects a flat model; use fit_traditional or fit_sequential for " +
                     std::to_string(spec.levels()) + "-level models");
  return fit_model(spec, data, options);
}

FittedModel fit_traditional(const ModelSpec& spec, const DataMatrix& data, const FitOptions& options) {
  if (spec.levels() < 2) throw ModelError("fit_traditional expects a hierarchical model; use fit_cfa for flat models");
  return fit_model(spec, data, options);
}

FittedModel fit_independence(const Eigen::MatrixXd& sample_cov, int n_obs, const std::vector<std::string>& observed) {
  const auto p = static_cast<int>(sample_cov.rows());
  if (static_cast<int>(observed.size()) != p) throw ModelError("fit_independence: name count mismatch");
  FittedModel fit;
  fit.observed = observed;
  fit.n_obs = n_obs;
  fit.sample_cov = sample_cov;
  fit.estimates.lambda = Eigen::MatrixXd::Zero(p, 0);
  fit.estimates.beta = Eigen::MatrixXd::Zero(0, 0);
  fit.estimates.psi = Eigen::MatrixXd::Zero(0, 0);
  fit.estimates.theta = sample_cov.diagonal();
  fit.discrepancy = ml_discrepancy(sample_cov, Eigen::MatrixXd(sample_cov.diagonal().asDiagonal()), p);
  fit.chi_square = (n_obs - 1) * fit.discrepancy;
  fit.df = p * (p - 1) / 2;
  fit.status = FitStatus::Converged;
  fit.message = "independence baseline";
  return fit;
}

}  // namespace seqcfa
