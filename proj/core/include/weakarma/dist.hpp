#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace weakarma {

/// Monte Carlo sample of the pivotal limit law used by the self-normalized
/// statistics. For each K the law is that of
///
///   U_K = B_K(1)' V_K^{-1} B_K(1),
///   V_K = int_0^1 (B_K(r) - r B_K(1)) (B_K(r) - r B_K(1))' dr,
///
/// where B_K is a K-dimensional standard Brownian motion. Each draw
/// simulates B_K on a uniform grid, approximates V_K by the left-endpoint
/// Riemann sum (the bridge vanishes at r = 0) and evaluates the quadratic
/// form.
struct QuantileTable {
  struct Entry {
    std::vector<double> sorted;  // ascending draws, all >= 0
    std::uint64_t resamples = 0; // draws redone due to a singular V_K
  };

  std::map<int, Entry> samples;  // keyed by K
  std::uint64_t seed = 0;
  std::uint64_t draws = 0;       // R, per K
  int n_steps = 0;

  bool has(int K) const { return samples.count(K) != 0; }
  std::vector<int> k_values() const;

  /// Empirical quantile of U_K. Throws std::out_of_range when K is absent.
  double quantile(int K, double alpha) const;
};

/// Tabulates one K. Preconditions: K >= 1, R >= 1000, n_steps >= 100.
QuantileTable::Entry tabulate_uk(int K, std::uint64_t R, int n_steps,
                                 std::uint64_t seed, int threads = 1);

/// Tabulates a set of K values into one table (draws parallelise over
/// replications; the per-draw stream index makes the result independent
/// of the thread count).
QuantileTable tabulate_table(const std::vector<int>& k_values, std::uint64_t R,
                             int n_steps, std::uint64_t seed, int threads = 1);

/// Midpoint-corrected empirical p-value:
///   p = (#{draws > stat} + 0.5) / (R + 1).
/// Throws std::out_of_range when K is absent from the table.
double uk_pvalue(const QuantileTable& table, int K, double stat);

/// Binary table file (little-endian, length-prefixed double arrays).
void save_table(const QuantileTable& table, const std::string& path);
QuantileTable load_table(const std::string& path);

/// Chi-squared survival function via the regularized incomplete gamma
/// function. Preconditions: stat >= 0, df >= 1.
double chi2_pvalue(double stat, int df);
double chi2_cdf(double stat, int df);

/// Chi-squared quantile by bisection on the CDF (absolute tolerance 1e-10).
/// Preconditions: 0 < alpha < 1, df >= 1.
double chi2_quantile(double alpha, int df);

}  // namespace weakarma
