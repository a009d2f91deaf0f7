#pragma once

#include <Eigen/Dense>
#include <vector>

namespace weakarma {

/// Multivariate time series: one observation per row, one column per
/// coordinate (n x d).
using TimeSeries = Eigen::MatrixXd;

/// One coefficient entry of the stacked [A_1 .. A_p B_1 .. B_q] matrices:
/// either a free parameter (index into the parameter vector) or a fixed
/// real constant.
struct MaskEntry {
  enum class Kind { Free, Fixed };
  Kind kind;
  int index = 0;       // valid when kind == Free
  double value = 0.0;  // valid when kind == Fixed

  static MaskEntry free(int theta_index) {
    return MaskEntry{Kind::Free, theta_index, 0.0};
  }
  static MaskEntry fixed(double v) { return MaskEntry{Kind::Fixed, 0, v}; }

  bool operator==(const MaskEntry&) const = default;
};

/// VARMA(p, q) model structure in reduced form,
///
///   X_t = sum_{i=1..p} A_i X_{t-i} + e_t - sum_{j=1..q} B_j e_{t-j},
///
/// with the entries of [A_1 .. A_p B_1 .. B_q] described by a mask in
/// row-major order (matrices ordered A_1..A_p then B_1..B_q, entries
/// row-major within each d x d matrix). Free entries are filled from a
/// parameter vector of length k0; fixed entries carry constants, which is
/// how identifying restrictions (zero or known coefficients) are imposed.
struct VarmaSpec {
  int d = 1;
  int p = 0;
  int q = 0;
  std::vector<MaskEntry> mask;

  int k0() const;

  /// Throws std::invalid_argument unless the mask has (p+q)*d*d entries,
  /// the free indices are exactly {0, .., k0-1} without duplicates, d >= 1
  /// and p, q >= 0.
  void validate() const;

  bool operator==(const VarmaSpec&) const = default;

  /// Fully parameterised spec: every entry of every coefficient matrix is
  /// free, in row-major order.
  static VarmaSpec full(int d, int p, int q);
};

/// Coefficient matrices produced by applying a parameter vector to a spec.
struct CoefficientMatrices {
  std::vector<Eigen::MatrixXd> ar;  // A_1 .. A_p
  std::vector<Eigen::MatrixXd> ma;  // B_1 .. B_q
};

struct StabilityReport {
  bool stable = false;
  bool invertible = false;
  // Smallest modulus among the roots of det A(z), resp. det B(z);
  // +infinity when the polynomial has no finite roots.
  double min_root_modulus_ar = 0.0;
  double min_root_modulus_ma = 0.0;
};

/// Residuals of the truncated filter and, optionally, their derivatives
/// with respect to the free parameters. `derivs` stacks the d x k0 matrix
/// d e_t / d theta' for t = 1..n into an (n*d) x k0 matrix; use
/// deriv_block(t) for the block of time index t (0-based).
struct ResidualSet {
  Eigen::MatrixXd residuals;  // n x d
  Eigen::MatrixXd derivs;     // (n*d) x k0, possibly 0 columns

  Eigen::Block<const Eigen::MatrixXd> deriv_block(int t) const {
    const int d = static_cast<int>(residuals.cols());
    return derivs.block(t * d, 0, d, derivs.cols());
  }
};

/// Fills the coefficient matrices from the mask and parameter vector.
/// Throws std::invalid_argument when theta.size() != k0.
CoefficientMatrices build_matrices(const VarmaSpec& spec,
                                   const Eigen::VectorXd& theta);

/// Inverse of build_matrices restricted to the free entries: reads theta
/// back out of the coefficient matrices.
Eigen::VectorXd extract_theta(const VarmaSpec& spec,
                              const CoefficientMatrices& coef);

/// Root check of det A(z) and det B(z) via block companion eigenvalues.
/// A parameter point is stable (resp. invertible) when every root has
/// modulus > 1 + margin; trailing all-zero coefficient matrices are
/// deflated before forming the companion matrix.
StabilityReport check_stability_invertibility(const VarmaSpec& spec,
                                              const Eigen::VectorXd& theta,
                                              double margin = 1e-8);

/// Truncated residual recursion
///   e_t = X_t - sum A_i X_{t-i} + sum B_j e_{t-j},
/// with X_s = 0 and e_s = 0 for s <= 0. Throws std::overflow_error naming
/// the first offending time index if the recursion produces a non-finite
/// value (explosive moving-average part).
ResidualSet residual_filter(const VarmaSpec& spec, const Eigen::VectorXd& theta,
                            const TimeSeries& series);

/// Residuals plus the exact derivative of the truncated recursion with
/// respect to every free parameter (zero initial values throughout).
ResidualSet residual_derivatives(const VarmaSpec& spec,
                                 const Eigen::VectorXd& theta,
                                 const TimeSeries& series);

}  // namespace weakarma
