#include "weakarma/estimate.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "weakarma/optimize.hpp"

namespace weakarma {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log det of an SPD matrix via Cholesky; NaN on failure.
double log_det_spd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

bool feasible(const VarmaSpec& spec, const Eigen::VectorXd& theta) {
  const StabilityReport report = check_stability_invertibility(spec, theta);
  return report.stable && report.invertible;
}

}  // namespace

Eigen::MatrixXd residual_covariance(const Eigen::MatrixXd& residuals) {
  const double n = static_cast<double>(residuals.rows());
  return (residuals.transpose() * residuals) / n;
}

double qmle_objective(const VarmaSpec& spec, const Eigen::VectorXd& theta,
                      const TimeSeries& series) {
  if (!feasible(spec, theta)) return kInf;
  try {
    const ResidualSet resid = residual_filter(spec, theta, series);
    const double value = log_det_spd(residual_covariance(resid.residuals));
    return std::isfinite(value) ? value : kInf;
  } catch (const std::overflow_error&) {
    return kInf;
  }
}

std::pair<double, Eigen::VectorXd> qmle_objective_gradient(
    const VarmaSpec& spec, const Eigen::VectorXd& theta,
    const TimeSeries& series) {
  const int k0 = spec.k0();
  if (!feasible(spec, theta)) {
    return {kInf, Eigen::VectorXd::Zero(k0)};
  }
  ResidualSet resid;
  try {
    resid = residual_derivatives(spec, theta, series);
  } catch (const std::overflow_error&) {
    return {kInf, Eigen::VectorXd::Zero(k0)};
  }
  const Eigen::MatrixXd sigma = residual_covariance(resid.residuals);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    return {kInf, Eigen::VectorXd::Zero(k0)};
  }
  const double value =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();

  const int n = static_cast<int>(series.rows());
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(k0);
  Eigen::VectorXd weighted(spec.d);
  for (int t = 0; t < n; ++t) {
    weighted = llt.solve(resid.residuals.row(t).transpose());
    grad.noalias() += resid.deriv_block(t).transpose() * weighted;
  }
  grad *= 2.0 / static_cast<double>(n);
  return {value, grad};
}

ParamEstimate qmle_fit(const VarmaSpec& spec, const TimeSeries& series,
                       const std::optional<Eigen::VectorXd>& init) {
  spec.validate();
  const int k0 = spec.k0();
  const int n = static_cast<int>(series.rows());
  ParamEstimate est;
  if (k0 == 0) {
    const ResidualSet resid = residual_filter(spec, Eigen::VectorXd(), series);
    est.theta_hat = Eigen::VectorXd();
    est.sigma_e_hat = residual_covariance(resid.residuals);
    est.objective_value = log_det_spd(est.sigma_e_hat);
    est.converged = true;
    return est;
  }
  if (n <= 10 * k0) {
    throw std::invalid_argument("qmle_fit: need n > 10 k0 (n=" +
                                std::to_string(n) + ", k0=" + std::to_string(k0) +
                                ")");
  }
  if (init && init->size() != k0) {
    throw std::invalid_argument("qmle_fit: init has wrong length");
  }

  // Perturbation of the free entries sitting on AR diagonals.
  Eigen::VectorXd diag_dirs = Eigen::VectorXd::Zero(k0);
  {
    std::size_t pos = 0;
    for (int lag = 1; lag <= spec.p; ++lag) {
      for (int r = 0; r < spec.d; ++r)
        for (int c = 0; c < spec.d; ++c) {
          const MaskEntry& entry = spec.mask[pos++];
          if (entry.kind == MaskEntry::Kind::Free && r == c) {
            diag_dirs(entry.index) = 1.0;
          }
        }
    }
  }

  std::vector<Eigen::VectorXd> starts;
  if (init) starts.push_back(*init);
  starts.push_back(0.1 * diag_dirs);
  starts.push_back(-0.1 * diag_dirs);
  starts.push_back(Eigen::VectorXd::Zero(k0));

  auto value = [&](const Eigen::VectorXd& theta) {
    return qmle_objective(spec, theta, series);
  };
  auto value_grad = [&](const Eigen::VectorXd& theta) {
    return qmle_objective_gradient(spec, theta, series);
  };

  bool any_feasible = false;
  bool have_best = false;
  OptimResult best;
  int total_iterations = 0;
  for (const auto& start : starts) {
    if (!std::isfinite(value(start))) continue;
    any_feasible = true;
    const OptimResult run = minimize_bfgs(value, value_grad, start);
    total_iterations += run.iterations;
    if (!have_best || run.value < best.value) {
      best = run;
      have_best = true;
    }
    if (run.converged) break;
  }
  if (!any_feasible) {
    throw std::domain_error(
        "qmle_fit: all starting points lie outside the stable/invertible "
        "region (check the fixed entries of the mask)");
  }

  const ResidualSet resid = residual_filter(spec, best.x, series);
  est.theta_hat = best.x;
  est.sigma_e_hat = residual_covariance(resid.residuals);
  est.objective_value = best.value;
  est.n_iterations = total_iterations;
  est.converged = best.converged;
  est.gradient_norm = best.grad_norm;
  return est;
}

Eigen::MatrixXd estimate_j_from(const ResidualSet& resid,
                                const Eigen::MatrixXd& sigma_e0) {
  const int k0 = static_cast<int>(resid.derivs.cols());
  const int n = static_cast<int>(resid.residuals.rows());
  if (k0 == 0) return Eigen::MatrixXd(0, 0);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_e0);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("estimate_j: residual covariance is singular");
  }
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(k0, k0);
  for (int t = 0; t < n; ++t) {
    const auto block = resid.deriv_block(t);
    j.noalias() += block.transpose() * llt.solve(block);
  }
  j *= 2.0 / static_cast<double>(n);
  return 0.5 * (j + j.transpose());
}

Eigen::MatrixXd estimate_phi_from(const ResidualSet& resid, int m) {
  if (m < 1) throw std::invalid_argument("estimate_phi: m must be >= 1");
  const int k0 = static_cast<int>(resid.derivs.cols());
  const int d = static_cast<int>(resid.residuals.cols());
  const int n = static_cast<int>(resid.residuals.rows());
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(m * d * d, k0);
  if (k0 == 0) return phi;
  for (int t = 0; t < n; ++t) {
    const auto block = resid.deriv_block(t);
    for (int h = 1; h <= m; ++h) {
      if (t - h < 0) break;
      for (int i = 0; i < d; ++i) {
        phi.block(((h - 1) * d + i) * d, 0, d, k0).noalias() +=
            resid.residuals(t - h, i) * block;
      }
    }
  }
  phi /= static_cast<double>(n);
  return phi;
}

Eigen::MatrixXd estimate_j(const VarmaSpec& spec, const Eigen::VectorXd& theta,
                           const TimeSeries& series) {
  const ResidualSet resid = residual_derivatives(spec, theta, series);
  return estimate_j_from(resid, residual_covariance(resid.residuals));
}

Eigen::MatrixXd estimate_j(const VarmaSpec& spec, const ParamEstimate& fit,
                           const TimeSeries& series) {
  return estimate_j(spec, fit.theta_hat, series);
}

Eigen::MatrixXd estimate_phi(const VarmaSpec& spec, const Eigen::VectorXd& theta,
                             const TimeSeries& series, int m) {
  const ResidualSet resid = residual_derivatives(spec, theta, series);
  return estimate_phi_from(resid, m);
}

Eigen::MatrixXd estimate_phi(const VarmaSpec& spec, const ParamEstimate& fit,
                             const TimeSeries& series, int m) {
  return estimate_phi(spec, fit.theta_hat, series, m);
}

}  // namespace weakarma
