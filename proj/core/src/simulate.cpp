#include "weakarma/simulate.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <string>

namespace weakarma {

namespace {

struct DimensionVisitor {
  int operator()(const StrongGaussian& k) const {
    return static_cast<int>(k.sigma.rows());
  }
  int operator()(const Garch11&) const { return 1; }
  int operator()(const ProductPT&) const { return 1; }
  int operator()(const ProductPTSquared&) const { return 1; }
  int operator()(const RatioRT&) const { return 1; }
  int operator()(const BiArch1&) const { return 2; }
  int operator()(const MultiPT&) const { return 2; }
  int operator()(const MultiPTSquared&) const { return 2; }
  int operator()(const MultiRT&) const { return 2; }
};

}  // namespace

int noise_dimension(const NoiseKind& kind) {
  return std::visit(DimensionVisitor{}, kind);
}

void validate_noise(const NoiseKind& kind) {
  if (const auto* g = std::get_if<StrongGaussian>(&kind)) {
    if (g->sigma.rows() < 1 || g->sigma.rows() != g->sigma.cols()) {
      throw std::domain_error("StrongGaussian: sigma must be square");
    }
    if (!g->sigma.isApprox(g->sigma.transpose(), 1e-12)) {
      throw std::domain_error("StrongGaussian: sigma must be symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(g->sigma);
    if (llt.info() != Eigen::Success) {
      throw std::domain_error("StrongGaussian: sigma must be positive definite");
    }
  } else if (const auto* g = std::get_if<Garch11>(&kind)) {
    if (g->omega <= 0.0 || g->alpha1 < 0.0 || g->beta1 < 0.0) {
      throw std::domain_error("Garch11: need omega > 0, alpha1 >= 0, beta1 >= 0");
    }
    if (g->alpha1 + g->beta1 >= 1.0) {
      throw std::domain_error("Garch11: alpha1 + beta1 must be < 1");
    }
  } else if (const auto* g = std::get_if<BiArch1>(&kind)) {
    if (g->omega.minCoeff() <= 0.0 || g->a.minCoeff() < 0.0) {
      throw std::domain_error("BiArch1: omega must be positive, A nonnegative");
    }
    const double radius =
        Eigen::EigenSolver<Eigen::Matrix2d>(g->a, false).eigenvalues().cwiseAbs().maxCoeff();
    if (radius >= 1.0) {
      throw std::domain_error("BiArch1: spectral radius of A must be < 1");
    }
  }
}

TimeSeries generate_noise(const NoiseKind& kind, int n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("generate_noise: n must be >= 1");
  validate_noise(kind);
  const int d = noise_dimension(kind);
  TimeSeries eps(n, d);

  if (const auto* k = std::get_if<StrongGaussian>(&kind)) {
    const Eigen::MatrixXd chol =
        Eigen::LLT<Eigen::MatrixXd>(k->sigma).matrixL();
    Eigen::VectorXd z(d);
    for (int t = 0; t < n; ++t) {
      for (int i = 0; i < d; ++i) z(i) = rng.gaussian();
      eps.row(t) = (chol * z).transpose();
    }
  } else if (const auto* k = std::get_if<Garch11>(&kind)) {
    double var = k->omega / (1.0 - k->alpha1 - k->beta1);
    for (int t = 0; t < n; ++t) {
      const double e = std::sqrt(var) * rng.gaussian();
      eps(t, 0) = e;
      var = k->omega + k->alpha1 * e * e + k->beta1 * var;
    }
  } else if (std::holds_alternative<ProductPT>(kind)) {
    double prev = rng.gaussian();
    for (int t = 0; t < n; ++t) {
      const double cur = rng.gaussian();
      eps(t, 0) = cur * prev;
      prev = cur;
    }
  } else if (std::holds_alternative<ProductPTSquared>(kind)) {
    double prev = rng.gaussian();
    for (int t = 0; t < n; ++t) {
      const double cur = rng.gaussian();
      eps(t, 0) = cur * cur * prev;
      prev = cur;
    }
  } else if (std::holds_alternative<RatioRT>(kind)) {
    double prev = rng.gaussian();
    for (int t = 0; t < n; ++t) {
      const double cur = rng.gaussian();
      eps(t, 0) = cur / (std::fabs(prev) + 1.0);
      prev = cur;
    }
  } else if (const auto* k = std::get_if<BiArch1>(&kind)) {
    Eigen::Vector2d h2 =
        (Eigen::Matrix2d::Identity() - k->a).lu().solve(k->omega);
    for (int t = 0; t < n; ++t) {
      Eigen::Vector2d eta{rng.gaussian(), rng.gaussian()};
      Eigen::Vector2d e = h2.cwiseSqrt().cwiseProduct(eta);
      eps.row(t) = e.transpose();
      h2 = k->omega + k->a * e.cwiseAbs2();
    }
  } else if (std::holds_alternative<MultiPT>(kind) ||
             std::holds_alternative<MultiPTSquared>(kind)) {
    const bool squared = std::holds_alternative<MultiPTSquared>(kind);
    Eigen::Vector2d lag2{rng.gaussian(), rng.gaussian()};
    Eigen::Vector2d lag1{rng.gaussian(), rng.gaussian()};
    for (int t = 0; t < n; ++t) {
      Eigen::Vector2d cur{rng.gaussian(), rng.gaussian()};
      const double f0 = squared ? cur(0) * cur(0) : cur(0);
      const double f1 = squared ? cur(1) * cur(1) : cur(1);
      eps(t, 0) = f0 * lag1(1) * lag2(0);
      eps(t, 1) = f1 * lag1(0) * lag2(1);
      lag2 = lag1;
      lag1 = cur;
    }
  } else if (std::holds_alternative<MultiRT>(kind)) {
    Eigen::Vector2d prev{rng.gaussian(), rng.gaussian()};
    for (int t = 0; t < n; ++t) {
      Eigen::Vector2d cur{rng.gaussian(), rng.gaussian()};
      eps(t, 0) = cur(0) / (std::fabs(prev(0)) + 1.0);
      eps(t, 1) = cur(1) / (std::fabs(prev(1)) + 1.0);
      prev = cur;
    }
  }
  return eps;
}

TimeSeries simulate_varma(const VarmaSpec& spec, const Eigen::VectorXd& theta,
                          const NoiseKind& kind, int n, int burnin,
                          RngStream& rng) {
  if (n < 1) throw std::invalid_argument("simulate_varma: n must be >= 1");
  if (burnin < 0) throw std::invalid_argument("simulate_varma: burnin must be >= 0");
  if (noise_dimension(kind) != spec.d) {
    throw std::invalid_argument("simulate_varma: noise dimension " +
                                std::to_string(noise_dimension(kind)) +
                                " does not match spec.d = " + std::to_string(spec.d));
  }
  const StabilityReport report = check_stability_invertibility(spec, theta);
  if (!report.stable || !report.invertible) {
    throw std::domain_error(
        "simulate_varma: theta is not stable and invertible (min AR root "
        "modulus " +
        std::to_string(report.min_root_modulus_ar) + ", min MA root modulus " +
        std::to_string(report.min_root_modulus_ma) + ")");
  }
  const CoefficientMatrices coef = build_matrices(spec, theta);
  const int total = n + burnin;
  const TimeSeries eps = generate_noise(kind, total, rng);
  TimeSeries x(total, spec.d);
  Eigen::VectorXd acc(spec.d);
  for (int t = 0; t < total; ++t) {
    acc = eps.row(t).transpose();
    for (int i = 1; i <= spec.p && t - i >= 0; ++i) {
      acc.noalias() +=
          coef.ar[static_cast<std::size_t>(i - 1)] * x.row(t - i).transpose();
    }
    for (int j = 1; j <= spec.q && t - j >= 0; ++j) {
      acc.noalias() -=
          coef.ma[static_cast<std::size_t>(j - 1)] * eps.row(t - j).transpose();
    }
    x.row(t) = acc.transpose();
  }
  return x.bottomRows(n);
}

}  // namespace weakarma
