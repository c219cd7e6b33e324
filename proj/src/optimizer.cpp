#include "seqcfa/optimizer.hpp"

#include <cmath>
#include <limits>

namespace seqcfa::optim {

namespace {
constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;
}  // namespace

QuasiNewtonResult minimize_bfgs(const Objective& objective, Eigen::VectorXd x0,
                                const QuasiNewtonOptions& options) {
  const Eigen::Index n = x0.size();
  QuasiNewtonResult res;
  res.x = std::move(x0);
  res.gradient = Eigen::VectorXd::Zero(n);
  res.f = objective(res.x, &res.gradient);
  if (!std::isfinite(res.f)) {
    res.reason = "objective is not finite at the starting point";
    return res;
  }

  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
  bool hinv_is_identity = true;
  bool first_step = true;
  Eigen::VectorXd g_new(n);

  while (res.iterations < options.max_iter) {
    if (res.gradient.lpNorm<Eigen::Infinity>() < options.tol_grad) {
      res.converged = true;
      res.reason = "gradient tolerance";
      return res;
    }
    ++res.iterations;

    Eigen::VectorXd dir = -hinv * res.gradient;
    double slope = res.gradient.dot(dir);
    if (!(slope < 0.0)) {
      hinv.setIdentity();
      hinv_is_identity = true;
      dir = -res.gradient;
      slope = -res.gradient.squaredNorm();
    }

    double alpha = 1.0;
    if (first_step) alpha = std::min(1.0, 1.0 / std::max(1e-12, res.gradient.lpNorm<Eigen::Infinity>()));
    const double alpha0 = alpha;
    bool accepted = false;
    Eigen::VectorXd x_new(n);
    double f_new = std::numeric_limits<double>::infinity();
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      x_new = res.x + alpha * dir;
      f_new = objective(x_new, &g_new);
      if (std::isfinite(f_new) && f_new <= res.f + kArmijo * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= std::isfinite(f_new) ? 0.5 : 0.1;
    }

    if (!accepted) {
      if (!hinv_is_identity) {
        hinv.setIdentity();
        hinv_is_identity = true;
        continue;
      }
      // No descent possible along the gradient: either a numerical floor at the
      // minimum or a genuine failure.
      res.converged = res.gradient.lpNorm<Eigen::Infinity>() < std::sqrt(options.tol_grad);
      res.reason = "line search failed";
      return res;
    }

    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - res.gradient;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (hinv_is_identity) hinv *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = hinv * y;
      // H+ = (I - rho s y') H (I - rho y s') + rho s s'
      hinv += rho * ((1.0 + rho * y.dot(hy)) * (s * s.transpose()) - (hy * s.transpose() + s * hy.transpose()));
      hinv_is_identity = false;
    }

    const double change = res.f - f_new;
    res.x = x_new;
    res.f = f_new;
    res.gradient = g_new;
    first_step = false;

    if (alpha == alpha0 && std::abs(change) <= options.tol_f * std::max(1.0, std::abs(res.f))) {
      res.converged = true;
      res.reason = "function tolerance";
      return res;
    }
  }
  res.reason = "iteration limit";
  return res;
}

}  // namespace seqcfa::optim
