#include "weakarma/varma.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace weakarma {

int VarmaSpec::k0() const {
  int count = 0;
  for (const auto& entry : mask) {
    if (entry.kind == MaskEntry::Kind::Free) ++count;
  }
  return count;
}

void VarmaSpec::validate() const {
  if (d < 1) throw std::invalid_argument("VarmaSpec: d must be >= 1");
  if (p < 0 || q < 0) throw std::invalid_argument("VarmaSpec: p, q must be >= 0");
  const std::size_t expected =
      static_cast<std::size_t>(p + q) * static_cast<std::size_t>(d) *
      static_cast<std::size_t>(d);
  if (mask.size() != expected) {
    throw std::invalid_argument("VarmaSpec: mask has " +
                                std::to_string(mask.size()) + " entries, expected " +
                                std::to_string(expected));
  }
  const int k = k0();
  std::vector<bool> seen(static_cast<std::size_t>(k), false);
  for (const auto& entry : mask) {
    if (entry.kind != MaskEntry::Kind::Free) continue;
    if (entry.index < 0 || entry.index >= k) {
      throw std::invalid_argument("VarmaSpec: free index " +
                                  std::to_string(entry.index) + " out of range");
    }
    if (seen[static_cast<std::size_t>(entry.index)]) {
      throw std::invalid_argument("VarmaSpec: duplicate free index " +
                                  std::to_string(entry.index));
    }
    seen[static_cast<std::size_t>(entry.index)] = true;
  }
}

VarmaSpec VarmaSpec::full(int d, int p, int q) {
  VarmaSpec spec;
  spec.d = d;
  spec.p = p;
  spec.q = q;
  const int total = (p + q) * d * d;
  spec.mask.reserve(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) spec.mask.push_back(MaskEntry::free(i));
  spec.validate();
  return spec;
}

CoefficientMatrices build_matrices(const VarmaSpec& spec,
                                   const Eigen::VectorXd& theta) {
  spec.validate();
  if (theta.size() != spec.k0()) {
    throw std::invalid_argument("build_matrices: theta has length " +
                                std::to_string(theta.size()) + ", expected " +
                                std::to_string(spec.k0()));
  }
  CoefficientMatrices coef;
  coef.ar.assign(static_cast<std::size_t>(spec.p),
                 Eigen::MatrixXd::Zero(spec.d, spec.d));
  coef.ma.assign(static_cast<std::size_t>(spec.q),
                 Eigen::MatrixXd::Zero(spec.d, spec.d));
  std::size_t pos = 0;
  auto fill = [&](Eigen::MatrixXd& m) {
    for (int r = 0; r < spec.d; ++r) {
      for (int c = 0; c < spec.d; ++c) {
        const MaskEntry& entry = spec.mask[pos++];
        m(r, c) = (entry.kind == MaskEntry::Kind::Free) ? theta(entry.index)
                                                        : entry.value;
      }
    }
  };
  for (auto& m : coef.ar) fill(m);
  for (auto& m : coef.ma) fill(m);
  return coef;
}

Eigen::VectorXd extract_theta(const VarmaSpec& spec,
                              const CoefficientMatrices& coef) {
  spec.validate();
  Eigen::VectorXd theta(spec.k0());
  std::size_t pos = 0;
  auto read = [&](const Eigen::MatrixXd& m) {
    for (int r = 0; r < spec.d; ++r) {
      for (int c = 0; c < spec.d; ++c) {
        const MaskEntry& entry = spec.mask[pos++];
        if (entry.kind == MaskEntry::Kind::Free) theta(entry.index) = m(r, c);
      }
    }
  };
  for (const auto& m : coef.ar) read(m);
  for (const auto& m : coef.ma) read(m);
  return theta;
}

namespace {

// Smallest root modulus of det(I - C_1 z - ... - C_k z^k), computed as the
// reciprocal spectral radius of the block companion matrix. Trailing zero
// matrices are dropped first (their roots sit at infinity).
double min_root_modulus(const std::vector<Eigen::MatrixXd>& coefs, int d) {
  int k = static_cast<int>(coefs.size());
  while (k > 0 && coefs[static_cast<std::size_t>(k - 1)].isZero(0.0)) --k;
  if (k == 0) return std::numeric_limits<double>::infinity();
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d * k, d * k);
  for (int i = 0; i < k; ++i) {
    companion.block(0, i * d, d, d) = coefs[static_cast<std::size_t>(i)];
  }
  if (k > 1) {
    companion.block(d, 0, d * (k - 1), d * (k - 1)) =
        Eigen::MatrixXd::Identity(d * (k - 1), d * (k - 1));
  }
  const Eigen::VectorXcd eigs =
      Eigen::EigenSolver<Eigen::MatrixXd>(companion, false).eigenvalues();
  const double radius = eigs.cwiseAbs().maxCoeff();
  if (radius <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / radius;
}

}  // namespace

StabilityReport check_stability_invertibility(const VarmaSpec& spec,
                                              const Eigen::VectorXd& theta,
                                              double margin) {
  const CoefficientMatrices coef = build_matrices(spec, theta);
  StabilityReport report;
  report.min_root_modulus_ar = min_root_modulus(coef.ar, spec.d);
  report.min_root_modulus_ma = min_root_modulus(coef.ma, spec.d);
  report.stable = report.min_root_modulus_ar > 1.0 + margin;
  report.invertible = report.min_root_modulus_ma > 1.0 + margin;
  return report;
}

namespace {

void check_series(const VarmaSpec& spec, const TimeSeries& series) {
  if (series.rows() < 1) {
    throw std::invalid_argument("residual filter: series must have n >= 1");
  }
  if (series.cols() != spec.d) {
    throw std::invalid_argument("residual filter: series has " +
                                std::to_string(series.cols()) +
                                " columns, spec.d = " + std::to_string(spec.d));
  }
  if (!series.allFinite()) {
    throw std::invalid_argument("residual filter: series contains non-finite values");
  }
}

[[noreturn]] void throw_overflow(int t) {
  throw std::overflow_error(
      "residual recursion produced a non-finite value at t=" +
      std::to_string(t + 1) + " (moving-average part appears explosive)");
}

// Positions of the free parameters inside the coefficient matrices.
struct FreePosition {
  bool in_ar;
  int lag;  // 1-based
  int row;
  int col;
  int theta_index;
};

std::vector<FreePosition> free_positions(const VarmaSpec& spec) {
  std::vector<FreePosition> out;
  std::size_t pos = 0;
  for (int lag = 1; lag <= spec.p; ++lag) {
    for (int r = 0; r < spec.d; ++r)
      for (int c = 0; c < spec.d; ++c) {
        const MaskEntry& entry = spec.mask[pos++];
        if (entry.kind == MaskEntry::Kind::Free)
          out.push_back({true, lag, r, c, entry.index});
      }
  }
  for (int lag = 1; lag <= spec.q; ++lag) {
    for (int r = 0; r < spec.d; ++r)
      for (int c = 0; c < spec.d; ++c) {
        const MaskEntry& entry = spec.mask[pos++];
        if (entry.kind == MaskEntry::Kind::Free)
          out.push_back({false, lag, r, c, entry.index});
      }
  }
  return out;
}

Eigen::MatrixXd filter_residuals(const VarmaSpec& spec,
                                 const CoefficientMatrices& coef,
                                 const TimeSeries& series) {
  const int n = static_cast<int>(series.rows());
  const int d = spec.d;
  Eigen::MatrixXd resid(n, d);
  Eigen::VectorXd acc(d);
  for (int t = 0; t < n; ++t) {
    acc = series.row(t).transpose();
    for (int i = 1; i <= spec.p && t - i >= 0; ++i) {
      acc.noalias() -= coef.ar[static_cast<std::size_t>(i - 1)] *
                       series.row(t - i).transpose();
    }
    for (int j = 1; j <= spec.q && t - j >= 0; ++j) {
      acc.noalias() += coef.ma[static_cast<std::size_t>(j - 1)] *
                       resid.row(t - j).transpose();
    }
    if (!acc.allFinite()) throw_overflow(t);
    resid.row(t) = acc.transpose();
  }
  return resid;
}

}  // namespace

ResidualSet residual_filter(const VarmaSpec& spec, const Eigen::VectorXd& theta,
                            const TimeSeries& series) {
  check_series(spec, series);
  const CoefficientMatrices coef = build_matrices(spec, theta);
  ResidualSet out;
  out.residuals = filter_residuals(spec, coef, series);
  out.derivs.resize(0, 0);
  return out;
}

ResidualSet residual_derivatives(const VarmaSpec& spec,
                                 const Eigen::VectorXd& theta,
                                 const TimeSeries& series) {
  check_series(spec, series);
  const CoefficientMatrices coef = build_matrices(spec, theta);
  const int n = static_cast<int>(series.rows());
  const int d = spec.d;
  const int k0 = spec.k0();

  ResidualSet out;
  out.residuals = filter_residuals(spec, coef, series);
  out.derivs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n) * d, k0);
  if (k0 == 0) return out;

  const std::vector<FreePosition> frees = free_positions(spec);
  for (int t = 0; t < n; ++t) {
    auto block = out.derivs.block(t * d, 0, d, k0);
    for (int j = 1; j <= spec.q && t - j >= 0; ++j) {
      block.noalias() += coef.ma[static_cast<std::size_t>(j - 1)] *
                         out.derivs.block((t - j) * d, 0, d, k0);
    }
    for (const auto& fp : frees) {
      if (t - fp.lag < 0) continue;
      if (fp.in_ar) {
        block(fp.row, fp.theta_index) -= series(t - fp.lag, fp.col);
      } else {
        block(fp.row, fp.theta_index) += out.residuals(t - fp.lag, fp.col);
      }
    }
    if (!block.allFinite()) throw_overflow(t);
  }
  return out;
}

}  // namespace weakarma
