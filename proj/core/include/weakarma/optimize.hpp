#pragma once

#include <Eigen/Dense>
#include <functional>

namespace weakarma {

struct OptimOptions {
  int max_iter = 500;
  double grad_tol = 1e-6;   // relative to max(1, |f|), infinity norm
  double step_tol = 1e-10;  // infinity norm of accepted step
};

struct OptimResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;
};

/// Dense BFGS with Armijo backtracking.
///
/// `value` evaluates the objective alone (it may return +infinity to mark
/// an infeasible point; the line search backtracks past such points).
/// `value_grad` evaluates objective and gradient together and is only
/// called at accepted, feasible points. The starting point must be
/// feasible; std::invalid_argument is thrown otherwise.
OptimResult minimize_bfgs(
    const std::function<double(const Eigen::VectorXd&)>& value,
    const std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)>&
        value_grad,
    const Eigen::VectorXd& x0, const OptimOptions& options = {});

}  // namespace weakarma
