#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "seqcfa/error.hpp"
#include "seqcfa/metrics.hpp"
#include "seqcfa/simgen.hpp"

using namespace seqcfa;

namespace {

// Two-sided p-value for integer df from the closed-form series of the t CDF.
double t_two_sided_oracle(double t, int df) {
  const double theta = std::atan(std::abs(t) / std::sqrt(static_cast<double>(df)));
  const double s = std::sin(theta), c = std::cos(theta);
  double a;
  if (df % 2 == 1) {
    double sum = 0.0;
    if (df > 1) {
      double term = 1.0;
      sum = 1.0;
      for (int k = 2; k <= df - 3; k += 2) {
        term *= static_cast<double>(k) / (k + 1) * c * c;
        sum += term;
      }
      sum *= s * c;
    }
    a = 2.0 / std::numbers::pi * (theta + sum);
  } else {
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= df - 3; k += 2) {
      term *= static_cast<double>(k) / (k + 1) * c * c;
      sum += term;
    }
    a = s * sum;
  }
  return 1.0 - a;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("fit indices: hand case") {
    const FitIndexBlock b = fit_indices_from_chi_square(50.0, 10, 500.0, 15, 101);
    REQUIRE(b.rmsea.has_value());
    REQUIRE(b.tli.has_value());
    CHECK(std::abs(*b.rmsea - 0.2) < 1e-4);
    CHECK(std::abs(b.cfi - 0.9175) < 1e-4);
    CHECK(std::abs(*b.tli - 0.8763) < 1e-4);
  }

  TEST_CASE("fit indices: perfect fit and zero df") {
    const FitIndexBlock p = fit_indices_from_chi_square(0.0, 5, 300.0, 15, 200);
    CHECK(p.cfi == 1.0);
    CHECK(*p.rmsea == 0.0);
    const FitIndexBlock z = fit_indices_from_chi_square(0.0, 0, 300.0, 3, 200);
    CHECK(z.cfi == 1.0);
    CHECK_FALSE(z.tli.has_value());
    CHECK_FALSE(z.rmsea.has_value());
  }

  TEST_CASE("fit indices on a fitted model and on the independence baseline") {
    SimCondition c;
    c.design = Design::Complex;
    c.n_obs = 500;
    c.seed = 3;
    const auto ds = generate(c);
    const FittedModel fit = fit_traditional(ds.params.spec, ds.data);
    REQUIRE(fit.converged());
    const FitIndexBlock b = fit_indices(fit, fit.sample_cov);
    CHECK(b.cfi > 0.95);
    CHECK(b.cfi <= 1.0);
    CHECK(b.srmr >= 0.0);
    CHECK(b.srmr < 0.08);
    CHECK(*b.rmsea >= 0.0);
    CHECK(b.baseline_df == 66);

    const FittedModel base = fit_independence(fit.sample_cov, fit.n_obs, fit.observed);
    CHECK(fit_indices(base, fit.sample_cov).cfi == doctest::Approx(0.0));
  }

  TEST_CASE("SRMR is zero for an exact fit") {
    Eigen::MatrixXd s(3, 3);
    s << 2, 0.5, 0.3, 0.5, 1, 0.2, 0.3, 0.2, 1.5;
    CHECK(srmr(s, s) == 0.0);
    CHECK(srmr(s, Eigen::MatrixXd(s.diagonal().asDiagonal())) > 0.0);
  }

  TEST_CASE("omega") {
    const std::vector<double> l{0.7, 0.7, 0.7}, t{0.51, 0.51, 0.51};
    CHECK(std::abs(mcdonald_omega(l, t) - 0.7424) < 1e-4);
    CHECK(mcdonald_omega(l, std::vector<double>{1e-12, 1e-12, 1e-12}) == doctest::Approx(1.0));
    CHECK(mcdonald_omega(std::vector<double>{0.0}, std::vector<double>{1.0}) == 0.0);
    CHECK_THROWS(mcdonald_omega(std::vector<double>{}, std::vector<double>{}));
    const std::vector<double> l2{0.9, 0.5, 0.7}, t2{0.19, 0.75, 0.51};
    const std::vector<double> l3{0.7, 0.9, 0.5}, t3{0.51, 0.19, 0.75};
    CHECK(mcdonald_omega(l2, t2) == doctest::Approx(mcdonald_omega(l3, t3)).epsilon(1e-15));
  }

  TEST_CASE("pearson_r examples") {
    CHECK(pearson_r(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(1, 2, 3)) == doctest::Approx(1.0));
    CHECK(pearson_r(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(3, 2, 1)) == doctest::Approx(-1.0));
    CHECK(pearson_r(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(2, 2, 5)) == doctest::Approx(0.8660).epsilon(1e-4));
    CHECK_THROWS_AS(pearson_r(Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(1, 2, 3)), NumericError);
    CHECK_THROWS(pearson_r(Eigen::Vector3d(1, 2, 3), Eigen::Vector2d(1, 2)));
  }

  TEST_CASE("rmse_aligned examples") {
    const Eigen::VectorXd t = Eigen::VectorXd::Random(50);
    CHECK(rmse_aligned(t, t) < 1e-12);
    CHECK(rmse_aligned(-t, t) < 1e-12);
    CHECK(rmse_aligned((2.0 * t.array() + 5.0).matrix(), t) < 1e-12);
    CHECK_THROWS_AS(rmse_aligned(Eigen::VectorXd::Ones(5), Eigen::VectorXd::Random(5)), NumericError);
  }

  TEST_CASE("rmse^2 = 2(1 - |r|)") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z;
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd a(30), b(30);
      const double mix = (k % 2 ? -1.0 : 1.0) * (k / 100.0);
      for (int i = 0; i < 30; ++i) {
        a(i) = z(rng);
        b(i) = mix * a(i) + z(rng);
      }
      const double e = rmse_aligned(a, b);
      CHECK(std::abs(e * e - 2.0 * (1.0 - std::abs(pearson_r(a, b)))) < 1e-10);
    }
  }

  TEST_CASE("paired t: hand case") {
    Eigen::VectorXd d(5);
    d << -0.1, -0.2, -0.15, -0.05, -0.1;
    const PairedTestResult r = paired_t_test(d, 0.95);
    CHECK(r.mean_diff == doctest::Approx(-0.12));
    CHECK(std::abs(r.t_stat - (-4.707)) < 1e-3);
    CHECK(r.df == 4);
    CHECK(r.ci_low <= r.mean_diff);
    CHECK(r.mean_diff <= r.ci_high);
    CHECK(r.p_value < 0.01);
  }

  TEST_CASE("paired t: null and degenerate cases") {
    Eigen::VectorXd d(200);
    for (int i = 0; i < 200; ++i) d(i) = i % 2 ? 0.3 : -0.3;
    const PairedTestResult r = paired_t_test(d);
    CHECK(std::abs(r.mean_diff) < 1e-15);
    CHECK(r.p_value == doctest::Approx(1.0));
    CHECK_THROWS_AS(paired_t_test(Eigen::VectorXd::Constant(5, 0.2)), NumericError);
    CHECK_THROWS(paired_t_test(Eigen::VectorXd::Constant(1, 0.2)));
  }

  TEST_CASE("paired t matches a direct-formula oracle") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> z;
    std::uniform_int_distribution<int> len(2, 12);
    for (int k = 0; k < 100; ++k) {
      const int n = len(rng);
      Eigen::VectorXd d(n);
      for (int i = 0; i < n; ++i) d(i) = z(rng) + 0.4;
      double mean = 0.0;
      for (int i = 0; i < n; ++i) mean += d(i);
      mean /= n;
      double ss = 0.0;
      for (int i = 0; i < n; ++i) ss += (d(i) - mean) * (d(i) - mean);
      const double t = mean / std::sqrt(ss / (n - 1) / n);
      const PairedTestResult r = paired_t_test(d);
      CHECK(std::abs(r.t_stat - t) < 1e-8 * std::max(1.0, std::abs(t)));
      CHECK(std::abs(r.p_value - t_two_sided_oracle(t, n - 1)) < 1e-8);
      CHECK(r.ci_low <= r.mean_diff);
      CHECK(r.ci_high >= r.mean_diff);
    }
  }

  TEST_CASE("confidence interval width follows the t quantile") {
    Eigen::VectorXd d(5);
    d << 1, 2, 3, 4, 5;
    const PairedTestResult r = paired_t_test(d, 0.95);
    // t_{0.975, 4} = 2.776445105; se = sqrt(2.5 / 5)
    CHECK((r.ci_high - r.ci_low) / 2.0 == doctest::Approx(2.776445105 * std::sqrt(0.5)).epsilon(1e-8));
  }
}
