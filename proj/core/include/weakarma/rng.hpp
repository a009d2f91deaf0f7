#pragma once

#include <cstdint>

namespace weakarma {

/// Deterministic random stream identified by a (seed, stream) pair.
///
/// The pair fully determines the output sequence, so replication r of a
/// Monte Carlo experiment can be reproduced in isolation by constructing
/// RngStream(seed, r). Distinct stream indices are mixed through a 64-bit
/// finalizer, giving statistically independent sequences.
///
/// Gaussian variates use a fixed inverse-CDF method (see
/// standard_normal_quantile), so output is identical across platforms for
/// a given build.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  /// Uniform draw in the open interval (0, 1) with 53-bit resolution.
  double uniform01();

  /// Standard normal draw via the inverse CDF applied to uniform01().
  double gaussian();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t state_[4];
  std::uint64_t seed_;
  std::uint64_t stream_;
};

/// Quantile function of the standard normal distribution (Wichura's
/// PPND16 rational approximations, accurate to ~1e-16 on (0,1)).
double standard_normal_quantile(double p);

}  // namespace weakarma
