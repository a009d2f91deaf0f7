#include "weakarma/optimize.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace weakarma {

OptimResult minimize_bfgs(
    const std::function<double(const Eigen::VectorXd&)>& value,
    const std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)>&
        value_grad,
    const Eigen::VectorXd& x0, const OptimOptions& options) {
  const int k = static_cast<int>(x0.size());
  OptimResult result;
  result.x = x0;
  auto [fx, gx] = value_grad(x0);
  if (!std::isfinite(fx)) {
    throw std::invalid_argument("minimize_bfgs: starting point is infeasible");
  }
  result.value = fx;
  result.grad = gx;

  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(k, k);
  constexpr double armijo_c1 = 1e-4;

  for (int iter = 0; iter < options.max_iter; ++iter) {
    result.iterations = iter;
    result.grad_norm = gx.lpNorm<Eigen::Infinity>();
    if (result.grad_norm <= options.grad_tol * std::max(1.0, std::fabs(fx))) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd direction = -(h_inv * gx);
    double slope = direction.dot(gx);
    if (!(slope < 0.0) || !direction.allFinite()) {
      h_inv.setIdentity();
      direction = -gx;
      slope = direction.dot(gx);
    }

    double alpha = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int backtrack = 0; backtrack < 60; ++backtrack) {
      x_new = result.x + alpha * direction;
      f_new = value(x_new);
      if (std::isfinite(f_new) && f_new <= fx + armijo_c1 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // line search failed, report best point so far

    const Eigen::VectorXd step = alpha * direction;
    auto [f_next, g_next] = value_grad(x_new);
    const Eigen::VectorXd y = g_next - gx;
    const double sy = step.dot(y);
    if (sy > 1e-12 * step.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(k, k);
      const Eigen::MatrixXd left = identity - rho * step * y.transpose();
      h_inv = left * h_inv * left.transpose() +
              rho * step * step.transpose();
    }

    result.x = x_new;
    fx = f_next;
    gx = g_next;
    result.value = fx;
    result.grad = gx;

    if (step.lpNorm<Eigen::Infinity>() < options.step_tol) {
      result.grad_norm = gx.lpNorm<Eigen::Infinity>();
      result.converged = true;
      result.iterations = iter + 1;
      break;
    }
  }
  result.grad_norm = gx.lpNorm<Eigen::Infinity>();
  if (!result.converged) {
    result.converged =
        result.grad_norm <= options.grad_tol * std::max(1.0, std::fabs(fx));
  }
  return result;
}

}  // namespace weakarma
