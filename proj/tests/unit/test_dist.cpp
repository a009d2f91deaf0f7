#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <limits>

#include "doctest.h"
#include "oracles.hpp"
#include "weakarma/dist.hpp"
#include "weakarma/rng.hpp"

using namespace weakarma;

TEST_CASE("normal quantile inverts the erfc-based CDF") {
  for (double p : {1e-12, 1e-6, 0.01, 0.2, 0.5, 0.7, 0.975, 1.0 - 1e-9}) {
    const double x = standard_normal_quantile(p);
    const double cdf = 0.5 * std::erfc(-x / std::sqrt(2.0));
    CHECK(cdf == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK(standard_normal_quantile(0.5) == doctest::Approx(0.0).scale(1.0));
  CHECK_THROWS_AS(standard_normal_quantile(0.0), std::domain_error);
}

TEST_CASE("rng streams are deterministic") {
  RngStream a(123, 7), b(123, 7), c(123, 8);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    all_equal = all_equal && (x == b.next_u64());
    any_diff = any_diff || (x != c.next_u64());
  }
  CHECK(all_equal);
  CHECK(any_diff);
  CHECK(a.uniform01() > 0.0);
  CHECK(a.uniform01() < 1.0);
}

TEST_CASE("chi-squared CDF against Simpson quadrature") {
  for (const auto& [x, df] : std::vector<std::pair<double, int>>{
           {3.84, 1}, {0.5, 1}, {5.99, 2}, {12.0, 7}, {30.0, 25}}) {
    CHECK(chi2_cdf(x, df) ==
          doctest::Approx(oracles::chi2_cdf_simpson(x, df)).epsilon(1e-6));
  }
}

TEST_CASE("chi-squared quantile and p-value") {
  CHECK(chi2_quantile(0.95, 1) == doctest::Approx(3.8415).epsilon(1e-3 / 3.8415));
  CHECK(chi2_pvalue(0.0, 3) == doctest::Approx(1.0));
  for (int df : {1, 2, 5, 12}) {
    for (double alpha : {0.05, 0.5, 0.95, 0.99}) {
      CHECK(chi2_pvalue(chi2_quantile(alpha, df), df) ==
            doctest::Approx(1.0 - alpha).epsilon(1e-8));
    }
  }
  SUBCASE("monotonicity") {
    double prev = 1.0;
    for (double x : {0.1, 1.0, 3.0, 8.0, 20.0}) {
      const double p = chi2_pvalue(x, 4);
      CHECK(p <= prev);
      prev = p;
    }
  }
  SUBCASE("domain checks") {
    CHECK_THROWS_AS(chi2_pvalue(-1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(chi2_quantile(0.95, 0), std::invalid_argument);
    CHECK_THROWS_AS(chi2_quantile(1.0, 3), std::invalid_argument);
  }
}

TEST_CASE("tabulate_uk basic properties") {
  const auto entry = tabulate_uk(2, 2000, 200, 7, 1);
  CHECK(entry.sorted.size() == 2000);
  CHECK(entry.resamples == 0);
  CHECK(entry.sorted.front() >= 0.0);
  CHECK(std::is_sorted(entry.sorted.begin(), entry.sorted.end()));

  QuantileTable table;
  table.draws = 2000;
  table.samples[2] = entry;
  CHECK(table.quantile(2, 0.5) < table.quantile(2, 0.95));
  CHECK_THROWS_AS(table.quantile(5, 0.95), std::out_of_range);
}

TEST_CASE("mean of the K = 1 law matches the analytic value") {
  // E[U_1] = E[B(1)^2] E[1/V] with the bridge integral's Laplace transform
  // giving E[1/V] = 10.7583 (B(1) and the bridge are independent).
  const auto entry = tabulate_uk(1, 20000, 1000, 11, 1);
  double mean = 0.0;
  for (double x : entry.sorted) mean += x;
  mean /= static_cast<double>(entry.sorted.size());
  CHECK(mean == doctest::Approx(10.7583).epsilon(0.05));
}

TEST_CASE("means increase with K") {
  double prev = 0.0;
  for (int k = 1; k <= 4; ++k) {
    const auto entry = tabulate_uk(k, 5000, 300, 13, 1);
    double mean = 0.0;
    for (double x : entry.sorted) mean += x;
    mean /= static_cast<double>(entry.sorted.size());
    CHECK(mean > prev);
    prev = mean;
  }
}

TEST_CASE("grid refinement stability") {
  const auto coarse = tabulate_uk(2, 30000, 1000, 17, 1);
  const auto fine = tabulate_uk(2, 30000, 4000, 19, 1);
  const auto q = [](const QuantileTable::Entry& e, double alpha) {
    return e.sorted[static_cast<std::size_t>(alpha * e.sorted.size())];
  };
  CHECK(std::fabs(q(coarse, 0.95) - q(fine, 0.95)) < 0.03 * q(fine, 0.95));
}

TEST_CASE("uk_pvalue conventions") {
  QuantileTable table;
  table.draws = 2000;
  table.samples[3] = tabulate_uk(3, 2000, 200, 23, 1);
  const double r = 2000.0;
  CHECK(uk_pvalue(table, 3, 0.0) >= (r - 0.5) / (r + 1.0));
  const double q95 = table.quantile(3, 0.95);
  CHECK(uk_pvalue(table, 3, q95) == doctest::Approx(0.05).epsilon(0.2));
  CHECK(uk_pvalue(table, 3, std::numeric_limits<double>::infinity()) ==
        doctest::Approx(0.5 / (r + 1.0)));
  CHECK_THROWS_AS(uk_pvalue(table, 4, 1.0), std::out_of_range);
}

TEST_CASE("table file round trip") {
  QuantileTable table;
  table.seed = 42;
  table.draws = 1500;
  table.n_steps = 150;
  table.samples[1] = tabulate_uk(1, 1500, 150, 42, 1);
  table.samples[4] = tabulate_uk(4, 1500, 150, 43, 1);
  const std::string path = "test_table_roundtrip.bin";
  save_table(table, path);
  const QuantileTable loaded = load_table(path);
  std::remove(path.c_str());
  CHECK(loaded.seed == table.seed);
  CHECK(loaded.draws == table.draws);
  CHECK(loaded.n_steps == table.n_steps);
  REQUIRE(loaded.samples.size() == 2);
  CHECK(loaded.samples.at(1).sorted == table.samples.at(1).sorted);
  CHECK(loaded.samples.at(4).sorted == table.samples.at(4).sorted);
}

TEST_CASE("tabulate_uk rejects undersized settings") {
  CHECK_THROWS_AS(tabulate_uk(0, 2000, 200, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(tabulate_uk(1, 10, 200, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(tabulate_uk(1, 2000, 10, 1, 1), std::invalid_argument);
}
