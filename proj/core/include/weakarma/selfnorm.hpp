#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "weakarma/dist.hpp"
#include "weakarma/estimate.hpp"
#include "weakarma/varma.hpp"

namespace weakarma {

/// Residual autocovariances and autocorrelations up to lag m.
///
/// gamma[h-1] = (1/n) sum_{t=h+1..n} e_t e_{t-h}' (truncated sums divided
/// by n, not n-h); s_e holds the per-coordinate residual standard
/// deviations; rho and gamma_m stack vec R(h) resp. vec Gamma(h) over
/// h = 1..m (column-major vec), so rho = {I_m (x) (S_e (x) S_e)}^{-1} gamma_m.
struct AutoCovSet {
  std::vector<Eigen::MatrixXd> gamma;  // Gamma(1) .. Gamma(m), each d x d
  Eigen::MatrixXd gamma0;              // Gamma(0)
  Eigen::VectorXd s_e;                 // d
  Eigen::VectorXd rho;                 // m d^2
  Eigen::VectorXd gamma_m;             // m d^2
};

/// Intermediate state of the self-normalization pipeline.
struct SelfNormState {
  Eigen::MatrixXd lambda_hat;  // (m d^2) x (k0 + m d^2)
  Eigen::MatrixXd u_hat;       // n x (k0 + m d^2)
  Eigen::MatrixXd c_hat;       // (m d^2) x (m d^2), symmetric PSD
};

/// Classical portmanteau statistics. For d = 1, q_c coincides with q_bp
/// and q_h equals n/(n+2) times q_lb.
struct StandardStats {
  double q_bp = 0.0;
  double q_lb = 0.0;
  double q_c = 0.0;
  double q_h = 0.0;
};

struct DiagnosticRow {
  // Statistics stay NaN when they could not be computed for this lag
  // (see the error field).
  int m = 0;
  double q_sn = std::numeric_limits<double>::quiet_NaN();
  double q_sn_tilde = std::numeric_limits<double>::quiet_NaN();
  double q_bp = std::numeric_limits<double>::quiet_NaN();
  double q_lb = std::numeric_limits<double>::quiet_NaN();
  double q_c = std::numeric_limits<double>::quiet_NaN();
  double q_h = std::numeric_limits<double>::quiet_NaN();
  std::optional<int> df_chi2;      // m d^2 - k0 when positive, else n.a.
  std::optional<double> p_sn;
  std::optional<double> p_sn_tilde;
  std::optional<double> p_chi2_bp;  // from q_bp (d = 1) / q_c (d >= 2)
  std::optional<double> p_chi2_lb;  // from q_lb (d = 1) / q_h (d >= 2)
  std::vector<double> rho_lag;      // vec R(m)
  std::optional<std::string> error; // set when the normalizer failed for this m
};

struct DiagnosticReport {
  int d = 1;
  int n = 0;
  int k0 = 0;
  std::vector<DiagnosticRow> rows;
};

/// Truncated residual autocovariances up to lag m. Throws
/// std::invalid_argument unless 1 <= m < n and std::runtime_error when a
/// residual coordinate has zero variance (degenerate residuals).
AutoCovSet autocov(const Eigen::MatrixXd& residuals, int m);

/// Lambda_hat = [ Phi_hat J_hat^{-1} | I_{m d^2} ]. Throws
/// std::runtime_error when J_hat has condition number above 1e12.
Eigen::MatrixXd build_lambda(const InformationMatrices& info);

/// Row t: ( (-2 (d e_t'/d theta) Sigma_e0^{-1} e_t)',
///          (e_{t-1} (x) e_t)', ..., (e_{t-m} (x) e_t)' ),
/// with e_s = 0 for s <= 0. Throws std::runtime_error on singular Sigma_e0.
Eigen::MatrixXd build_u_hat(const ResidualSet& resid,
                            const Eigen::MatrixXd& sigma_e0, int m);

/// C_hat = (1/n^2) sum_t S_t S_t' with S_t = sum_{j<=t} (Lambda U_j - gamma_m),
/// accumulated in one pass. The result is symmetric PSD by construction.
Eigen::MatrixXd build_c_hat(const Eigen::MatrixXd& lambda_hat,
                            const Eigen::MatrixXd& u_hat,
                            const Eigen::VectorXd& gamma_m);

/// Reference value of the m = 1 normalizer for an AR(1) model with known
/// coefficient, evaluated directly from the noise sequence:
///
///   C_1 = (1/n^2) sum_t { sum_{j<=t} ( -(1-a0^2) sum_{i>=1} a0^{i-1} eps_j eps_{j-i}
///                                      + eps_j eps_{j-1} - Gamma_e(1) ) }^2,
///
/// with the inner series truncated after `truncation` terms, eps_s = 0 for
/// s <= 0 and Gamma_e(1) the empirical lag-1 autocovariance of eps. This
/// is an independent route used to validate build_c_hat.
double ar1_c1_oracle(double a0, const Eigen::VectorXd& noise, int truncation);

/// Self-normalized portmanteau statistic
///   Q^SN = n rho' {I_m (x) (S_e (x) S_e)} C^{-1} {I_m (x) (S_e (x) S_e)} rho,
/// computed through a symmetric eigendecomposition of C. Throws
/// std::runtime_error when C is numerically singular (condition number
/// above 1e12); under the model assumptions C is almost surely invertible,
/// so this indicates degenerate residuals (e.g. a noise distribution with
/// an atom at zero).
double q_sn(const Eigen::VectorXd& rho, const Eigen::VectorXd& s_e,
            const Eigen::MatrixXd& c_hat, int n);

/// Lag-weighted variant. For d = 1 the weights (n+2)/(n-h) enter
/// symmetrically as D^{1/2} C^{-1} D^{1/2}; for d >= 2 each lag block of
/// the scaled autocorrelation vector is weighted by n/(n-h) (each weight
/// repeated d^2 times). Both coincide with q_sn as n -> infinity.
double q_sn_tilde(const Eigen::VectorXd& rho, const Eigen::VectorXd& s_e,
                  const Eigen::MatrixXd& c_hat, int n, int m);

/// Box-Pierce, Ljung-Box and their multivariate trace versions. Throws
/// std::runtime_error when Gamma(0) is singular.
StandardStats q_standard(const AutoCovSet& acs, int n);

/// Assembles Lambda, U and C for a fitted model.
SelfNormState build_selfnorm_state(const ResidualSet& resid,
                                   const Eigen::MatrixXd& sigma_e0, int m);

/// Runs the full diagnostic battery for every m in m_list. Per-m
/// normalizer failures are recorded in the row's error field without
/// aborting the remaining lags. Requires a converged fit and
/// max(m_list) < n.
DiagnosticReport run_diagnostics(const VarmaSpec& spec, const ParamEstimate& fit,
                                 const TimeSeries& series,
                                 const std::vector<int>& m_list,
                                 const QuantileTable& table);

}  // namespace weakarma
