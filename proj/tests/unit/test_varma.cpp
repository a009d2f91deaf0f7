#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>

#include "doctest.h"
#include "weakarma/json_io.hpp"
#include "weakarma/rng.hpp"
#include "weakarma/varma.hpp"

using namespace weakarma;

namespace {

Eigen::MatrixXd random_series(int n, int d, std::uint64_t seed) {
  RngStream rng(seed, 0);
  Eigen::MatrixXd x(n, d);
  for (int t = 0; t < n; ++t)
    for (int c = 0; c < d; ++c) x(t, c) = rng.gaussian();
  return x;
}

}  // namespace

TEST_CASE("build_matrices fills free and fixed entries") {
  const VarmaSpec arma11 = VarmaSpec::full(1, 1, 1);
  const auto coef = build_matrices(arma11, Eigen::Vector2d{0.95, -0.6});
  CHECK(coef.ar[0](0, 0) == doctest::Approx(0.95));
  CHECK(coef.ma[0](0, 0) == doctest::Approx(-0.6));

  const auto zeros = build_matrices(arma11, Eigen::Vector2d{0.0, 0.0});
  CHECK(zeros.ar[0](0, 0) == 0.0);
  CHECK(zeros.ma[0](0, 0) == 0.0);
}

TEST_CASE("build_matrices bivariate example") {
  // Mask whose free indices follow the (a11, a21, a12, a22) listing order.
  VarmaSpec spec;
  spec.d = 2;
  spec.p = 1;
  spec.q = 1;
  for (int block = 0; block < 2; ++block) {
    const int base = 4 * block;
    spec.mask.push_back(MaskEntry::free(base + 0));  // (0,0)
    spec.mask.push_back(MaskEntry::free(base + 2));  // (0,1)
    spec.mask.push_back(MaskEntry::free(base + 1));  // (1,0)
    spec.mask.push_back(MaskEntry::free(base + 3));  // (1,1)
  }
  Eigen::VectorXd theta(8);
  theta << 1.2, 0.6, -0.5, 0.3, -0.6, 0.3, 0.3, 0.6;
  const auto coef = build_matrices(spec, theta);
  Eigen::Matrix2d a1;
  a1 << 1.2, -0.5, 0.6, 0.3;
  Eigen::Matrix2d b1;
  b1 << -0.6, 0.3, 0.3, 0.6;
  CHECK(coef.ar[0].isApprox(a1));
  CHECK(coef.ma[0].isApprox(b1));

  SUBCASE("extract_theta inverts build_matrices") {
    CHECK(extract_theta(spec, coef).isApprox(theta));
  }
}

TEST_CASE("spec validation errors") {
  const VarmaSpec spec = VarmaSpec::full(1, 1, 1);
  CHECK_THROWS_AS(build_matrices(spec, Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);
  VarmaSpec bad = spec;
  bad.mask[1] = MaskEntry::free(0);  // duplicate index
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("stability and invertibility roots") {
  SUBCASE("bivariate VARMA(1,1) root moduli") {
    const VarmaSpec spec = VarmaSpec::full(2, 1, 1);
    Eigen::VectorXd theta(8);
    theta << 1.2, -0.5, 0.6, 0.3, -0.6, 0.3, 0.3, 0.6;  // row-major A_1, B_1
    const auto report = check_stability_invertibility(spec, theta);
    CHECK(report.stable);
    CHECK(report.invertible);
    CHECK(report.min_root_modulus_ar == doctest::Approx(1.23).epsilon(0.01));
    CHECK(report.min_root_modulus_ma == doctest::Approx(1.49).epsilon(0.01));
  }
  SUBCASE("zero coefficients have no finite roots") {
    const auto report = check_stability_invertibility(
        VarmaSpec::full(1, 1, 1), Eigen::Vector2d{0.0, 0.0});
    CHECK(report.stable);
    CHECK(report.invertible);
    CHECK(std::isinf(report.min_root_modulus_ar));
    CHECK(std::isinf(report.min_root_modulus_ma));
  }
  SUBCASE("explosive AR is flagged") {
    const auto report = check_stability_invertibility(
        VarmaSpec::full(1, 1, 0), Eigen::VectorXd::Constant(1, 1.05));
    CHECK_FALSE(report.stable);
    CHECK(report.min_root_modulus_ar == doctest::Approx(1.0 / 1.05));
  }
  SUBCASE("unit root is not stable") {
    const auto report = check_stability_invertibility(
        VarmaSpec::full(1, 1, 0), Eigen::VectorXd::Constant(1, 1.0));
    CHECK_FALSE(report.stable);
  }
}

TEST_CASE("residual filter") {
  SUBCASE("p = q = 0 returns the series") {
    const VarmaSpec spec{1, 0, 0, {}};
    const auto x = random_series(20, 1, 1);
    const auto resid = residual_filter(spec, Eigen::VectorXd(), x);
    CHECK(resid.residuals.isApprox(x));
  }
  SUBCASE("AR(1) hand recursion") {
    const VarmaSpec spec = VarmaSpec::full(1, 1, 0);
    Eigen::MatrixXd x(3, 1);
    x << 1.0, 1.0, 1.0;
    const auto resid =
        residual_filter(spec, Eigen::VectorXd::Constant(1, 0.5), x);
    CHECK(resid.residuals(0, 0) == doctest::Approx(1.0));
    CHECK(resid.residuals(1, 0) == doctest::Approx(0.5));
    CHECK(resid.residuals(2, 0) == doctest::Approx(0.5));
  }
  SUBCASE("ARMA(1,1) matches the coefficient-expansion oracle") {
    // Truncated recursion equals e_t = sum_{i=0}^{t-1} c_i x_{t-i} with
    // c_0 = 1, c_i = b^{i-1} (b - a) for the (1 - a z)/(1 - b z) filter.
    const double a = 0.7, b = 0.4;
    const VarmaSpec spec = VarmaSpec::full(1, 1, 1);
    const auto x = random_series(50, 1, 2);
    const auto resid = residual_filter(spec, Eigen::Vector2d{a, b}, x);
    for (int t = 0; t < 50; ++t) {
      double expected = x(t, 0);
      double coeff = b - a;
      for (int i = 1; i <= t; ++i) {
        expected += coeff * x(t - i, 0);
        coeff *= b;
      }
      CHECK(resid.residuals(t, 0) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
  SUBCASE("explosive moving average names the failing index") {
    const VarmaSpec spec = VarmaSpec::full(1, 0, 1);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(1000, 1);
    try {
      residual_filter(spec, Eigen::VectorXd::Constant(1, 3.0), x);
      FAIL("expected overflow_error");
    } catch (const std::overflow_error& e) {
      CHECK(std::string(e.what()).find("t=") != std::string::npos);
    }
  }
  SUBCASE("linearity in the data") {
    const VarmaSpec spec = VarmaSpec::full(2, 1, 1);
    Eigen::VectorXd theta(8);
    theta << 0.4, 0.1, -0.2, 0.3, 0.2, 0.0, 0.1, -0.3;
    const auto x = random_series(60, 2, 3);
    const auto base = residual_filter(spec, theta, x);
    const auto scaled = residual_filter(spec, theta, 2.5 * x);
    CHECK(scaled.residuals.isApprox(2.5 * base.residuals, 1e-13));
  }
}

TEST_CASE("residual derivatives") {
  SUBCASE("k0 = 0 gives empty derivatives") {
    const VarmaSpec spec{2, 0, 0, {}};
    const auto resid =
        residual_derivatives(spec, Eigen::VectorXd(), random_series(10, 2, 4));
    CHECK(resid.derivs.cols() == 0);
  }
  SUBCASE("AR(1) derivative is -x_{t-1} exactly") {
    const VarmaSpec spec = VarmaSpec::full(1, 1, 0);
    const auto x = random_series(30, 1, 5);
    const auto resid =
        residual_derivatives(spec, Eigen::VectorXd::Constant(1, 0.3), x);
    CHECK(resid.derivs(0, 0) == 0.0);
    for (int t = 1; t < 30; ++t) {
      CHECK(resid.derivs(t, 0) == doctest::Approx(-x(t - 1, 0)));
    }
  }
  SUBCASE("central finite differences, univariate and bivariate") {
    struct Case {
      VarmaSpec spec;
      Eigen::VectorXd theta;
    };
    std::vector<Case> cases;
    cases.push_back({VarmaSpec::full(1, 1, 1), Eigen::Vector2d{0.5, 0.3}});
    {
      Eigen::VectorXd theta(8);
      theta << 0.4, 0.1, -0.2, 0.3, 0.2, -0.1, 0.1, -0.3;
      cases.push_back({VarmaSpec::full(2, 1, 1), theta});
    }
    for (const auto& c : cases) {
      const auto x = random_series(200, c.spec.d, 6);
      const auto resid = residual_derivatives(c.spec, c.theta, x);
      const double h = 1e-6;
      for (int l = 0; l < c.spec.k0(); ++l) {
        Eigen::VectorXd up = c.theta, down = c.theta;
        up(l) += h;
        down(l) -= h;
        const auto plus = residual_filter(c.spec, up, x);
        const auto minus = residual_filter(c.spec, down, x);
        const Eigen::MatrixXd fd = (plus.residuals - minus.residuals) / (2 * h);
        double worst = 0.0;
        for (int t = 0; t < 200; ++t) {
          for (int r = 0; r < c.spec.d; ++r) {
            const double exact = resid.derivs(t * c.spec.d + r, l);
            const double scale = std::max(1.0, std::fabs(exact));
            worst = std::max(worst, std::fabs(exact - fd(t, r)) / scale);
          }
        }
        CHECK(worst < 1e-5);
      }
    }
  }
  SUBCASE("truncation error of the zero-start recursion decays geometrically") {
    const VarmaSpec spec = VarmaSpec::full(1, 1, 1);
    const Eigen::Vector2d theta{0.5, 0.6};
    const auto x = random_series(600, 1, 7);
    const auto full = residual_filter(spec, theta, x);
    const auto tail = residual_filter(spec, theta, x.bottomRows(100));
    const auto diff = [&](int t) {
      return std::fabs(full.residuals(500 + t, 0) - tail.residuals(t, 0));
    };
    CHECK(diff(0) > 1e-8);       // the truncation is actually visible at the start
    CHECK(diff(40) < 1e-6);      // and has died off geometrically (0.6^40 ~ 1e-9)
    CHECK(diff(40) < diff(0));
    CHECK(diff(80) <= diff(40));
  }
}

TEST_CASE("spec JSON round trip") {
  VarmaSpec spec;
  spec.d = 2;
  spec.p = 1;
  spec.q = 1;
  for (int i = 0; i < 4; ++i) spec.mask.push_back(MaskEntry::free(i));
  spec.mask.push_back(MaskEntry::fixed(0.0));
  spec.mask.push_back(MaskEntry::free(4));
  spec.mask.push_back(MaskEntry::fixed(-1.5));
  spec.mask.push_back(MaskEntry::free(5));
  const VarmaSpec back = spec_from_json(spec_to_json(spec));
  CHECK(back == spec);

  const VarmaSpec parsed = spec_from_json(
      R"({"d":1,"p":1,"q":1,"mask":[["free",0],["fixed",0.25]]})");
  CHECK(parsed.k0() == 1);
  CHECK(parsed.mask[1].value == doctest::Approx(0.25));
}
