// Test-only reference computations, kept independent of the library's
// implementation paths.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracles {

// Formal matrix power series S(z) = S_0 + S_1 z + ... truncated after a
// fixed number of terms. Used to derive population quantities (moving
// average representations, derivative filters) from first principles.
using MatSeries = std::vector<Eigen::MatrixXd>;

inline MatSeries series_zero(int d, int terms) {
  return MatSeries(static_cast<std::size_t>(terms), Eigen::MatrixXd::Zero(d, d));
}

inline MatSeries series_mul(const MatSeries& a, const MatSeries& b) {
  const int d = static_cast<int>(a.front().rows());
  const int terms = static_cast<int>(std::min(a.size(), b.size()));
  MatSeries out = series_zero(d, terms);
  for (int k = 0; k < terms; ++k) {
    for (int i = 0; i <= k; ++i) {
      out[static_cast<std::size_t>(k)] +=
          a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(k - i)];
    }
  }
  return out;
}

// Inverse of P(z) with P_0 = I: Q_0 = I, Q_k = -sum_{j=1..k} P_j Q_{k-j}.
inline MatSeries series_inverse(const MatSeries& p, int terms) {
  const int d = static_cast<int>(p.front().rows());
  if (!p.front().isIdentity(1e-14)) {
    throw std::invalid_argument("series_inverse: leading coefficient must be I");
  }
  MatSeries q = series_zero(d, terms);
  q[0] = Eigen::MatrixXd::Identity(d, d);
  for (int k = 1; k < terms; ++k) {
    for (int j = 1; j <= k && j < static_cast<int>(p.size()); ++j) {
      q[static_cast<std::size_t>(k)] -=
          p[static_cast<std::size_t>(j)] * q[static_cast<std::size_t>(k - j)];
    }
  }
  return q;
}

// Truncated series for the lag polynomial I - sum_{i} C_i z^i.
inline MatSeries lag_polynomial(const std::vector<Eigen::MatrixXd>& coefs, int d,
                                int terms) {
  MatSeries p = series_zero(d, terms);
  p[0] = Eigen::MatrixXd::Identity(d, d);
  for (std::size_t i = 0; i < coefs.size() && i + 1 < static_cast<std::size_t>(terms);
       ++i) {
    p[i + 1] = -coefs[i];
  }
  return p;
}

// Chi-squared CDF by Simpson quadrature after the substitution x = u^2,
// which removes the integrable singularity at zero for df = 1.
inline double chi2_cdf_simpson(double x, int df, int panels = 20000) {
  if (x <= 0.0) return 0.0;
  const double a = 0.5 * static_cast<double>(df);
  const double log_norm = -a * std::log(2.0) - std::lgamma(a);
  auto integrand = [&](double u) {
    // 2 u^{df-1} e^{-u^2/2} / (2^{df/2} Gamma(df/2))
    return 2.0 * std::exp((df - 1) * std::log(u) - 0.5 * u * u + log_norm);
  };
  const double hi = std::sqrt(x);
  const double h = hi / (2 * panels);
  double sum = 0.0;  // integrand(0) = 0 for df >= 1 (limit for df = 1 is finite)
  if (df == 1) sum += std::sqrt(2.0 / M_PI);  // u -> 0 limit of the integrand
  for (int i = 1; i < 2 * panels; ++i) {
    sum += integrand(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  sum += integrand(hi);
  return sum * h / 3.0;
}

}  // namespace oracles
