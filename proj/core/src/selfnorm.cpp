#include "weakarma/selfnorm.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace weakarma {

namespace {

constexpr double kConditionCap = 1e12;

// {I_m (x) (S_e (x) S_e)} rho: entry (h, i*d + r) scaled by s_e(r) s_e(i).
Eigen::VectorXd scale_by_sd(const Eigen::VectorXd& rho,
                            const Eigen::VectorXd& s_e, int m) {
  const int d = static_cast<int>(s_e.size());
  Eigen::VectorXd out(rho.size());
  for (int h = 0; h < m; ++h) {
    for (int i = 0; i < d; ++i) {
      for (int r = 0; r < d; ++r) {
        const int idx = h * d * d + i * d + r;
        out(idx) = rho(idx) * s_e(r) * s_e(i);
      }
    }
  }
  return out;
}

// Eigendecomposition of a symmetric PSD normalizer with a hard condition
// cap. Regularizing here would silently change the statistic, so an
// ill-conditioned matrix is an error; it signals degenerate residuals
// (for instance a noise law with positive mass at zero).
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> decompose_normalizer(
    const Eigen::MatrixXd& c_hat) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c_hat);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("self-normalizer: eigendecomposition failed");
  }
  const double lo = solver.eigenvalues().minCoeff();
  const double hi = solver.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kConditionCap) {
    throw std::runtime_error(
        "self-normalizer is numerically singular (condition number above "
        "1e12); the residuals are degenerate on part of the sample");
  }
  return solver;
}

double quadratic_form_inverse(
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& solver,
    const Eigen::VectorXd& x) {
  const Eigen::VectorXd proj = solver.eigenvectors().transpose() * x;
  return (proj.array().square() / solver.eigenvalues().array()).sum();
}

}  // namespace

AutoCovSet autocov(const Eigen::MatrixXd& residuals, int m) {
  const int n = static_cast<int>(residuals.rows());
  const int d = static_cast<int>(residuals.cols());
  if (m < 1 || m >= n) {
    throw std::invalid_argument("autocov: need 1 <= m < n");
  }
  AutoCovSet acs;
  acs.gamma0 = (residuals.transpose() * residuals) / static_cast<double>(n);
  acs.s_e = acs.gamma0.diagonal().cwiseSqrt();
  if (!(acs.s_e.minCoeff() > 0.0)) {
    throw std::runtime_error(
        "autocov: a residual coordinate has zero variance (degenerate "
        "residuals)");
  }
  acs.gamma.reserve(static_cast<std::size_t>(m));
  acs.rho.resize(m * d * d);
  acs.gamma_m.resize(m * d * d);
  for (int h = 1; h <= m; ++h) {
    Eigen::MatrixXd g = (residuals.bottomRows(n - h).transpose() *
                         residuals.topRows(n - h)) /
                        static_cast<double>(n);
    for (int i = 0; i < d; ++i) {    // column of vec = column of Gamma(h)
      for (int r = 0; r < d; ++r) {  // row
        const int idx = (h - 1) * d * d + i * d + r;
        acs.gamma_m(idx) = g(r, i);
        acs.rho(idx) = g(r, i) / (acs.s_e(r) * acs.s_e(i));
      }
    }
    acs.gamma.push_back(std::move(g));
  }
  return acs;
}

Eigen::MatrixXd build_lambda(const InformationMatrices& info) {
  const int k0 = static_cast<int>(info.j_hat.rows());
  const int md2 = static_cast<int>(info.phi_hat.rows());
  Eigen::MatrixXd lambda(md2, k0 + md2);
  if (k0 > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(info.j_hat);
    if (solver.info() != Eigen::Success) {
      throw std::runtime_error("build_lambda: eigendecomposition of J failed");
    }
    const double lo = solver.eigenvalues().minCoeff();
    const double hi = solver.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kConditionCap) {
      throw std::runtime_error(
          "build_lambda: J is ill-conditioned (condition number above 1e12)");
    }
    lambda.leftCols(k0) =
        info.phi_hat * solver.eigenvectors() *
        solver.eigenvalues().cwiseInverse().asDiagonal() *
        solver.eigenvectors().transpose();
  }
  lambda.rightCols(md2) = Eigen::MatrixXd::Identity(md2, md2);
  return lambda;
}

Eigen::MatrixXd build_u_hat(const ResidualSet& resid,
                            const Eigen::MatrixXd& sigma_e0, int m) {
  const int n = static_cast<int>(resid.residuals.rows());
  const int d = static_cast<int>(resid.residuals.cols());
  const int k0 = static_cast<int>(resid.derivs.cols());
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_e0);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("build_u_hat: residual covariance is singular");
  }
  Eigen::MatrixXd u(n, k0 + m * d * d);
  Eigen::VectorXd weighted(d);
  for (int t = 0; t < n; ++t) {
    if (k0 > 0) {
      weighted = llt.solve(resid.residuals.row(t).transpose());
      u.row(t).head(k0) =
          -2.0 * (resid.deriv_block(t).transpose() * weighted).transpose();
    }
    for (int h = 1; h <= m; ++h) {
      auto block = u.row(t).segment(k0 + (h - 1) * d * d, d * d);
      if (t - h < 0) {
        block.setZero();
        continue;
      }
      for (int i = 0; i < d; ++i) {
        for (int r = 0; r < d; ++r) {
          block(i * d + r) = resid.residuals(t - h, i) * resid.residuals(t, r);
        }
      }
    }
  }
  return u;
}

Eigen::MatrixXd build_c_hat(const Eigen::MatrixXd& lambda_hat,
                            const Eigen::MatrixXd& u_hat,
                            const Eigen::VectorXd& gamma_m) {
  const int n = static_cast<int>(u_hat.rows());
  const int md2 = static_cast<int>(lambda_hat.rows());
  if (lambda_hat.cols() != u_hat.cols() || gamma_m.size() != md2) {
    throw std::invalid_argument("build_c_hat: inconsistent shapes");
  }
  Eigen::VectorXd partial = Eigen::VectorXd::Zero(md2);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(md2, md2);
  for (int t = 0; t < n; ++t) {
    partial.noalias() += lambda_hat * u_hat.row(t).transpose();
    partial -= gamma_m;
    c.selfadjointView<Eigen::Lower>().rankUpdate(partial);
  }
  c /= static_cast<double>(n) * static_cast<double>(n);
  c.triangularView<Eigen::Upper>() = c.transpose();
  return c;
}

double ar1_c1_oracle(double a0, const Eigen::VectorXd& noise, int truncation) {
  if (std::fabs(a0) >= 1.0) {
    throw std::invalid_argument("ar1_c1_oracle: |a0| must be < 1");
  }
  if (truncation < 1) {
    throw std::invalid_argument("ar1_c1_oracle: truncation must be >= 1");
  }
  const int n = static_cast<int>(noise.size());
  double gamma1 = 0.0;
  for (int t = 1; t < n; ++t) gamma1 += noise(t) * noise(t - 1);
  gamma1 /= static_cast<double>(n);

  double c1 = 0.0;
  double partial = 0.0;
  for (int j = 0; j < n; ++j) {
    double series = 0.0;  // sum_{i>=1} a0^{i-1} eps_j eps_{j-i}, truncated
    double power = 1.0;
    for (int i = 1; i <= truncation && j - i >= 0; ++i) {
      series += power * noise(j) * noise(j - i);
      power *= a0;
    }
    const double lag1 = (j >= 1) ? noise(j) * noise(j - 1) : 0.0;
    partial += -(1.0 - a0 * a0) * series + lag1 - gamma1;
    c1 += partial * partial;
  }
  return c1 / (static_cast<double>(n) * static_cast<double>(n));
}

double q_sn(const Eigen::VectorXd& rho, const Eigen::VectorXd& s_e,
            const Eigen::MatrixXd& c_hat, int n) {
  const int d = static_cast<int>(s_e.size());
  const int m = static_cast<int>(rho.size()) / (d * d);
  const Eigen::VectorXd x = scale_by_sd(rho, s_e, m);
  const auto solver = decompose_normalizer(c_hat);
  return static_cast<double>(n) * quadratic_form_inverse(solver, x);
}

double q_sn_tilde(const Eigen::VectorXd& rho, const Eigen::VectorXd& s_e,
                  const Eigen::MatrixXd& c_hat, int n, int m) {
  if (m >= n) throw std::invalid_argument("q_sn_tilde: need m < n");
  const int d = static_cast<int>(s_e.size());
  const Eigen::VectorXd x = scale_by_sd(rho, s_e, m);
  const auto solver = decompose_normalizer(c_hat);
  const double nn = static_cast<double>(n);
  if (d == 1) {
    // n rho' D^{1/2} C^{-1} D^{1/2} rho with D_hh = (n+2)/(n-h).
    Eigen::VectorXd z(m);
    for (int h = 1; h <= m; ++h) {
      z(h - 1) = std::sqrt((nn + 2.0) / (nn - h)) * x(h - 1);
    }
    return nn * quadratic_form_inverse(solver, z);
  }
  // Each lag block weighted by n/(n-h), the weight repeated d^2 times.
  Eigen::VectorXd wx(x.size());
  for (int h = 1; h <= m; ++h) {
    wx.segment((h - 1) * d * d, d * d) =
        (nn / (nn - h)) * x.segment((h - 1) * d * d, d * d);
  }
  const Eigen::VectorXd y =
      solver.eigenvectors() *
      (solver.eigenvectors().transpose() * x).cwiseQuotient(solver.eigenvalues());
  return nn * wx.dot(y);
}

StandardStats q_standard(const AutoCovSet& acs, int n) {
  const int d = static_cast<int>(acs.s_e.size());
  const int m = static_cast<int>(acs.gamma.size());
  const double nn = static_cast<double>(n);
  StandardStats stats;
  Eigen::LLT<Eigen::MatrixXd> llt(acs.gamma0);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("q_standard: Gamma(0) is singular");
  }
  const Eigen::MatrixXd g0_inv =
      llt.solve(Eigen::MatrixXd::Identity(d, d));
  for (int h = 1; h <= m; ++h) {
    const Eigen::MatrixXd& g = acs.gamma[static_cast<std::size_t>(h - 1)];
    const double tr = (g.transpose() * g0_inv * g * g0_inv).trace();
    stats.q_c += nn * tr;
    stats.q_h += nn * nn / (nn - h) * tr;
    if (d == 1) {
      const double r = acs.rho(h - 1);
      stats.q_bp += nn * r * r;
      stats.q_lb += nn * (nn + 2.0) * r * r / (nn - h);
    }
  }
  if (d > 1) {
    stats.q_bp = stats.q_c;
    stats.q_lb = stats.q_h;
  }
  return stats;
}

SelfNormState build_selfnorm_state(const ResidualSet& resid,
                                   const Eigen::MatrixXd& sigma_e0, int m) {
  InformationMatrices info;
  info.j_hat = estimate_j_from(resid, sigma_e0);
  info.phi_hat = estimate_phi_from(resid, m);
  SelfNormState state;
  state.lambda_hat = build_lambda(info);
  state.u_hat = build_u_hat(resid, sigma_e0, m);
  const AutoCovSet acs = autocov(resid.residuals, m);
  state.c_hat = build_c_hat(state.lambda_hat, state.u_hat, acs.gamma_m);
  return state;
}

DiagnosticReport run_diagnostics(const VarmaSpec& spec, const ParamEstimate& fit,
                                 const TimeSeries& series,
                                 const std::vector<int>& m_list,
                                 const QuantileTable& table) {
  spec.validate();
  if (!fit.converged) {
    throw std::invalid_argument("run_diagnostics: fit did not converge");
  }
  if (m_list.empty()) {
    throw std::invalid_argument("run_diagnostics: m_list is empty");
  }
  const int n = static_cast<int>(series.rows());
  const int m_max = *std::max_element(m_list.begin(), m_list.end());
  const int m_min = *std::min_element(m_list.begin(), m_list.end());
  if (m_min < 1 || m_max >= n) {
    throw std::invalid_argument("run_diagnostics: need 1 <= m < n");
  }

  DiagnosticReport report;
  report.d = spec.d;
  report.n = n;
  report.k0 = spec.k0();

  const ResidualSet resid = residual_derivatives(spec, fit.theta_hat, series);
  const Eigen::MatrixXd sigma_e0 = residual_covariance(resid.residuals);
  const AutoCovSet acs = autocov(resid.residuals, m_max);

  // The lag-h blocks of the partial sums do not depend on m, so the m d^2
  // normalizer for each requested m is the leading principal block of the
  // one built at m_max.
  SelfNormState state;
  std::optional<std::string> pipeline_error;
  try {
    state = build_selfnorm_state(resid, sigma_e0, m_max);
  } catch (const std::exception& e) {
    pipeline_error = e.what();
  }

  const int d = spec.d;
  for (int m : m_list) {
    DiagnosticRow row;
    row.m = m;
    const int md2 = m * d * d;
    const int df = md2 - report.k0;
    if (df > 0) row.df_chi2 = df;

    AutoCovSet sub;
    sub.gamma.assign(acs.gamma.begin(), acs.gamma.begin() + m);
    sub.gamma0 = acs.gamma0;
    sub.s_e = acs.s_e;
    sub.rho = acs.rho.head(md2);
    sub.gamma_m = acs.gamma_m.head(md2);
    row.rho_lag.assign(acs.rho.data() + (m - 1) * d * d,
                       acs.rho.data() + m * d * d);

    try {
      const StandardStats stats = q_standard(sub, n);
      row.q_bp = stats.q_bp;
      row.q_lb = stats.q_lb;
      row.q_c = stats.q_c;
      row.q_h = stats.q_h;
      if (df > 0) {
        row.p_chi2_bp = chi2_pvalue(d == 1 ? row.q_bp : row.q_c, df);
        row.p_chi2_lb = chi2_pvalue(d == 1 ? row.q_lb : row.q_h, df);
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }

    if (pipeline_error) {
      row.error = *pipeline_error;
    } else {
      try {
        const Eigen::MatrixXd c_sub = state.c_hat.topLeftCorner(md2, md2);
        row.q_sn = q_sn(sub.rho, sub.s_e, c_sub, n);
        row.q_sn_tilde = q_sn_tilde(sub.rho, sub.s_e, c_sub, n, m);
        if (table.has(md2)) {
          row.p_sn = uk_pvalue(table, md2, row.q_sn);
          row.p_sn_tilde = uk_pvalue(table, md2, row.q_sn_tilde);
        }
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace weakarma
