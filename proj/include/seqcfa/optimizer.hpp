#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace seqcfa::optim {

/// Objective returning f(x); when `grad` is non-null it must also be filled.
/// Returning +inf marks x as infeasible, which makes the line search backtrack.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct QuasiNewtonOptions {
  int max_iter = 500;
  double tol_grad = 1e-6;  // max-norm of the gradient
  double tol_f = 1e-9;     // relative change of f between full steps
};

struct QuasiNewtonResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  bool converged = false;
  std::string reason;
};

/// Dense BFGS with an Armijo backtracking line search.
QuasiNewtonResult minimize_bfgs(const Objective& objective, Eigen::VectorXd x0,
                                const QuasiNewtonOptions& options = {});

}  // namespace seqcfa::optim
