#pragma once

#include <Eigen/Dense>
#include <optional>

#include "weakarma/varma.hpp"

namespace weakarma {

/// Result of a Gaussian quasi-maximum-likelihood fit.
struct ParamEstimate {
  Eigen::VectorXd theta_hat;
  Eigen::MatrixXd sigma_e_hat;  // d x d residual covariance at theta_hat
  double objective_value = 0.0;
  int n_iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
};

/// Empirical linearization matrices of the residual diagnostics.
struct InformationMatrices {
  Eigen::MatrixXd j_hat;    // k0 x k0, symmetric PSD
  Eigen::MatrixXd phi_hat;  // (m d^2) x k0
};

/// Concentrated Gaussian quasi-likelihood criterion
///   log det( (1/n) sum_t e_t(theta) e_t(theta)' ),
/// up to an additive constant. Returns +infinity (not an exception) when
/// theta is outside the stable/invertible region or the recursion
/// overflows, so optimizers can recover by backtracking.
double qmle_objective(const VarmaSpec& spec, const Eigen::VectorXd& theta,
                      const TimeSeries& series);

/// Objective together with its exact gradient
///   g_l = (2/n) sum_t e_t' Sigma_hat^{-1} (d e_t / d theta_l).
/// The gradient is only valid at feasible points (finite objective).
std::pair<double, Eigen::VectorXd> qmle_objective_gradient(
    const VarmaSpec& spec, const Eigen::VectorXd& theta,
    const TimeSeries& series);

/// Quasi-Newton minimisation of the concentrated criterion. Starting
/// points: the user-supplied init when given, then zero vectors perturbed
/// by +/-0.1 on the free diagonal entries of the AR matrices; further
/// starts are only tried when the previous one fails to converge. Returns
/// the best point with converged=false after exhausting all starts;
/// throws std::domain_error if no starting point is feasible and
/// std::invalid_argument unless n > 10 k0.
ParamEstimate qmle_fit(const VarmaSpec& spec, const TimeSeries& series,
                       const std::optional<Eigen::VectorXd>& init = std::nullopt);

/// J_hat = (2/n) sum_t (d e_t'/d theta) Sigma^{-1} (d e_t/d theta') with
/// Sigma = (1/n) sum_t e_t e_t'. Throws std::runtime_error when the
/// residual covariance is singular.
Eigen::MatrixXd estimate_j(const VarmaSpec& spec, const Eigen::VectorXd& theta,
                           const TimeSeries& series);
Eigen::MatrixXd estimate_j(const VarmaSpec& spec, const ParamEstimate& fit,
                           const TimeSeries& series);

/// Phi_hat_m = (1/n) sum_t (e_{t-1}', ..., e_{t-m}')' (x) (d e_t/d theta'),
/// with e_s = 0 for s <= 0. Row block h is the empirical
/// E[e_{t-h} (x) d e_t/d theta'].
Eigen::MatrixXd estimate_phi(const VarmaSpec& spec, const Eigen::VectorXd& theta,
                             const TimeSeries& series, int m);
Eigen::MatrixXd estimate_phi(const VarmaSpec& spec, const ParamEstimate& fit,
                             const TimeSeries& series, int m);

/// Same as estimate_j / estimate_phi but reusing an existing ResidualSet
/// (must contain derivatives) and residual covariance.
Eigen::MatrixXd estimate_j_from(const ResidualSet& resid,
                                const Eigen::MatrixXd& sigma_e0);
Eigen::MatrixXd estimate_phi_from(const ResidualSet& resid, int m);

/// (1/n) sum_t e_t e_t'
Eigen::MatrixXd residual_covariance(const Eigen::MatrixXd& residuals);

}  // namespace weakarma
