#include "weakarma/dist.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "weakarma/parallel.hpp"
#include "weakarma/rng.hpp"

namespace weakarma {

std::vector<int> QuantileTable::k_values() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& [k, entry] : samples) out.push_back(k);
  return out;
}

double QuantileTable::quantile(int K, double alpha) const {
  const auto it = samples.find(K);
  if (it == samples.end()) {
    throw std::out_of_range("QuantileTable: K=" + std::to_string(K) +
                            " is not tabulated");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("QuantileTable: alpha must be in (0,1)");
  }
  const auto& sorted = it->second.sorted;
  const auto r = static_cast<std::ptrdiff_t>(sorted.size());
  auto idx = static_cast<std::ptrdiff_t>(std::floor(alpha * static_cast<double>(r)));
  idx = std::min(idx, r - 1);
  return sorted[static_cast<std::size_t>(idx)];
}

namespace {

// One draw of U_K. The grid has n_steps increments; V_K accumulates the
// left-endpoint bridge outer products through a single GEMM.
double draw_uk(int K, int n_steps, RngStream& rng, Eigen::MatrixXd& bridge,
               Eigen::VectorXd& endpoint) {
  const double sd = std::sqrt(1.0 / static_cast<double>(n_steps));
  // bridge.row(i) holds B(r_i) for i = 0..n_steps-1 (left endpoints).
  double prev;
  for (int k = 0; k < K; ++k) {
    prev = 0.0;
    for (int i = 0; i < n_steps; ++i) {
      bridge(i, k) = prev;
      prev += sd * rng.gaussian();
    }
    endpoint(k) = prev;  // B(1)
  }
  for (int i = 0; i < n_steps; ++i) {
    const double r = static_cast<double>(i) / static_cast<double>(n_steps);
    bridge.row(i).noalias() -= r * endpoint.transpose();
  }
  Eigen::MatrixXd v = (bridge.transpose() * bridge) /
                      static_cast<double>(n_steps);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(v);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0) {
    return -1.0;  // singular V_K, caller resamples
  }
  return endpoint.dot(ldlt.solve(endpoint));
}

}  // namespace

QuantileTable::Entry tabulate_uk(int K, std::uint64_t R, int n_steps,
                                 std::uint64_t seed, int threads) {
  if (K < 1) throw std::invalid_argument("tabulate_uk: K must be >= 1");
  if (R < 1000) throw std::invalid_argument("tabulate_uk: R must be >= 1000");
  if (n_steps < 100) throw std::invalid_argument("tabulate_uk: n_steps must be >= 100");

  QuantileTable::Entry entry;
  entry.sorted.resize(R);
  std::atomic<std::uint64_t> resamples{0};
  // Stream index = draw index; retries of draw r use streams r + R, r + 2R, ...
  // so they cannot collide with the base streams of other draws.
  parallel_for(static_cast<int>(R), threads, [&](int r) {
    Eigen::MatrixXd bridge(n_steps, K);
    Eigen::VectorXd endpoint(K);
    std::uint64_t stream = static_cast<std::uint64_t>(r);
    for (;;) {
      RngStream rng(seed, stream);
      const double value = draw_uk(K, n_steps, rng, bridge, endpoint);
      if (value >= 0.0) {
        entry.sorted[static_cast<std::size_t>(r)] = value;
        return;
      }
      resamples.fetch_add(1);
      stream += R;
    }
  });
  entry.resamples = resamples.load();
  std::sort(entry.sorted.begin(), entry.sorted.end());
  return entry;
}

QuantileTable tabulate_table(const std::vector<int>& k_values, std::uint64_t R,
                             int n_steps, std::uint64_t seed, int threads) {
  QuantileTable table;
  table.seed = seed;
  table.draws = R;
  table.n_steps = n_steps;
  for (int K : k_values) {
    // Per-K seed offset keeps draws independent across K values.
    table.samples[K] =
        tabulate_uk(K, R, n_steps, seed + 0x9E3779B9ULL * static_cast<std::uint64_t>(K),
                    threads);
  }
  return table;
}

double uk_pvalue(const QuantileTable& table, int K, double stat) {
  const auto it = table.samples.find(K);
  if (it == table.samples.end()) {
    throw std::out_of_range("uk_pvalue: K=" + std::to_string(K) +
                            " is not tabulated");
  }
  const auto& sorted = it->second.sorted;
  const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), stat);
  return (static_cast<double>(above) + 0.5) /
         (static_cast<double>(sorted.size()) + 1.0);
}

namespace {

constexpr char kMagic[8] = {'U', 'K', 'Q', 'T', 'A', 'B', 'L', 'E'};
constexpr std::uint32_t kVersion = 1;

void put_u64(std::ostream& os, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(bytes, 8);
}

void put_u32(std::ostream& os, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(bytes, 4);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char bytes[8];
  is.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char bytes[4];
  is.read(reinterpret_cast<char*>(bytes), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void save_table(const QuantileTable& table, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_table: cannot open " + path);
  os.write(kMagic, 8);
  put_u32(os, kVersion);
  put_u64(os, table.seed);
  put_u64(os, table.draws);
  put_u64(os, static_cast<std::uint64_t>(table.n_steps));
  put_u64(os, table.samples.size());
  for (const auto& [k, entry] : table.samples) {
    put_u64(os, static_cast<std::uint64_t>(k));
    put_u64(os, entry.resamples);
    put_u64(os, entry.sorted.size());
    for (double x : entry.sorted) put_u64(os, std::bit_cast<std::uint64_t>(x));
  }
  if (!os) throw std::runtime_error("save_table: write failed for " + path);
}

QuantileTable load_table(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_table: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("load_table: " + path + " is not a quantile table");
  }
  const std::uint32_t version = get_u32(is);
  if (version != kVersion) {
    throw std::runtime_error("load_table: unsupported version " +
                             std::to_string(version));
  }
  QuantileTable table;
  table.seed = get_u64(is);
  table.draws = get_u64(is);
  table.n_steps = static_cast<int>(get_u64(is));
  const std::uint64_t count = get_u64(is);
  for (std::uint64_t i = 0; i < count; ++i) {
    const int k = static_cast<int>(get_u64(is));
    QuantileTable::Entry entry;
    entry.resamples = get_u64(is);
    const std::uint64_t len = get_u64(is);
    entry.sorted.resize(len);
    for (std::uint64_t j = 0; j < len; ++j) {
      entry.sorted[j] = std::bit_cast<double>(get_u64(is));
    }
    table.samples[k] = std::move(entry);
  }
  if (!is) throw std::runtime_error("load_table: truncated file " + path);
  return table;
}

namespace {

// Regularized lower incomplete gamma P(a, x): series for x < a + 1,
// continued fraction (modified Lentz) otherwise.
double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) {
    throw std::invalid_argument("gamma_p: need x >= 0 and a > 0");
  }
  if (x == 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 1000; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Q(a, x) via continued fraction.
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

}  // namespace

double chi2_cdf(double stat, int df) {
  if (df < 1) throw std::invalid_argument("chi2_cdf: df must be >= 1");
  if (stat < 0.0) throw std::invalid_argument("chi2_cdf: stat must be >= 0");
  return gamma_p(0.5 * static_cast<double>(df), 0.5 * stat);
}

double chi2_pvalue(double stat, int df) { return 1.0 - chi2_cdf(stat, df); }

double chi2_quantile(double alpha, int df) {
  if (df < 1) throw std::invalid_argument("chi2_quantile: df must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("chi2_quantile: alpha must be in (0,1)");
  }
  double lo = 0.0;
  double hi = static_cast<double>(df) +
              10.0 * std::sqrt(2.0 * static_cast<double>(df)) + 10.0;
  while (chi2_cdf(hi, df) < alpha) hi *= 2.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(mid, df) < alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace weakarma
