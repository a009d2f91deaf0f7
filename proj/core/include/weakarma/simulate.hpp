#pragma once

#include <Eigen/Dense>
#include <variant>

#include "weakarma/rng.hpp"
#include "weakarma/varma.hpp"

namespace weakarma {

// Innovation generators. StrongGaussian is an iid benchmark; the others
// are uncorrelated-but-dependent ("weak") noises built from an iid
// standard Gaussian driver eta_t. Presample eta values required by the
// product/ratio constructions are drawn from the same stream, oldest
// first, before the main recursion starts.

/// iid N(0, Sigma) vectors, Sigma symmetric positive definite.
struct StrongGaussian {
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(1, 1);
};

/// eps_t = s_t eta_t with s_t^2 = omega + alpha1 eps_{t-1}^2 + beta1 s_{t-1}^2,
/// started at the unconditional variance omega / (1 - alpha1 - beta1).
struct Garch11 {
  double omega = 1.0;
  double alpha1 = 0.0;
  double beta1 = 0.0;
};

/// eps_t = eta_t * eta_{t-1}
struct ProductPT {};

/// eps_t = eta_t^2 * eta_{t-1} (not a martingale difference)
struct ProductPTSquared {};

/// eps_t = eta_t / (|eta_{t-1}| + 1)
struct RatioRT {};

/// Bivariate diagonal ARCH(1):
///   eps_{i,t} = h_{ii,t} eta_{i,t},
///   (h_{11,t}^2, h_{22,t}^2)' = omega + A (eps_{1,t-1}^2, eps_{2,t-1}^2)',
/// started at the unconditional variance (I - A)^{-1} omega.
struct BiArch1 {
  Eigen::Vector2d omega{0.3, 0.2};
  Eigen::Matrix2d a{{0.45, 0.0}, {0.40, 0.25}};
};

/// eps_{1,t} = eta_{1,t} eta_{2,t-1} eta_{1,t-2};
/// eps_{2,t} = eta_{2,t} eta_{1,t-1} eta_{2,t-2}
struct MultiPT {};

/// Same as MultiPT with the leading factor squared.
struct MultiPTSquared {};

/// eps_{i,t} = eta_{i,t} / (|eta_{i,t-1}| + 1), i = 1, 2
struct MultiRT {};

using NoiseKind =
    std::variant<StrongGaussian, Garch11, ProductPT, ProductPTSquared, RatioRT,
                 BiArch1, MultiPT, MultiPTSquared, MultiRT>;

/// Output dimension of a noise kind.
int noise_dimension(const NoiseKind& kind);

/// Throws std::domain_error when the parameters violate the generator's
/// constraints (Garch11: nonnegative coefficients with alpha1 + beta1 < 1;
/// StrongGaussian: SPD sigma; BiArch1: nonnegative entries, spectral
/// radius of A below 1).
void validate_noise(const NoiseKind& kind);

/// n draws of the noise process, one row per time step.
TimeSeries generate_noise(const NoiseKind& kind, int n, RngStream& rng);

/// Simulates X_t = sum A_i X_{t-i} + eps_t - sum B_j eps_{t-j} from zero
/// initial state over n + burnin steps and returns the last n rows.
/// Throws std::domain_error when theta is not stable and invertible.
TimeSeries simulate_varma(const VarmaSpec& spec, const Eigen::VectorXd& theta,
                          const NoiseKind& kind, int n, int burnin,
                          RngStream& rng);

}  // namespace weakarma
