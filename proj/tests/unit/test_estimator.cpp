#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "seqcfa/error.hpp"
#include "seqcfa/estimator.hpp"
#include "seqcfa/simgen.hpp"

using namespace seqcfa;

namespace {

// Central differences of MlProblem::value.
Eigen::VectorXd numeric_gradient(const MlProblem& prob, const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (prob.value(a) - prob.value(b)) / (2.0 * h);
  }
  return g;
}

DataMatrix one_factor_data(const Eigen::VectorXd& loadings, const Eigen::VectorXd& theta, int n, std::uint64_t seed) {
  const Eigen::MatrixXd sigma = loadings * loadings.transpose() + Eigen::MatrixXd(theta.asDiagonal());
  return testutil::draw_normal(sigma, n, seed, testutil::names("x", static_cast<int>(loadings.size())));
}

}  // namespace

TEST_SUITE("estimator") {
  TEST_CASE("implied covariance examples") {
    Eigen::MatrixXd l(2, 1);
    l << 1, 1;
    Eigen::MatrixXd psi(1, 1);
    psi << 1;
    const Eigen::MatrixXd s = implied_covariance(l, psi, Eigen::VectorXd(Eigen::Vector2d(0.5, 0.5)));
    CHECK(s(0, 0) == doctest::Approx(1.5));
    CHECK(s(0, 1) == doctest::Approx(1.0));
    CHECK(s(1, 1) == doctest::Approx(1.5));

    const Eigen::MatrixXd theta = Eigen::Vector3d(0.3, 0.4, 0.5).asDiagonal();
    CHECK(implied_covariance(Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Identity(2, 2), theta).isApprox(theta));
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
    CHECK(implied_covariance(eye, eye, Eigen::MatrixXd(Eigen::MatrixXd::Zero(3, 3)))
              .isApprox(Eigen::MatrixXd::Identity(3, 3)));
    CHECK_THROWS_AS(implied_covariance(Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Identity(3, 3), theta),
                    ModelError);
    CHECK_THROWS_AS(implied_covariance(Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Identity(2, 2),
                                       Eigen::VectorXd(Eigen::VectorXd::Ones(4))),
                    ModelError);
  }

  TEST_CASE("ml_discrepancy scalar cases") {
    const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 1, 1.0);
    const Eigen::MatrixXd two = Eigen::MatrixXd::Constant(1, 1, 2.0);
    CHECK(std::abs(ml_discrepancy(two, one, 1) - (1.0 - std::log(2.0))) < 1e-10);
    CHECK(std::abs(ml_discrepancy(one, two, 1) - (std::log(2.0) + 0.5 - 1.0)) < 1e-10);
    CHECK(ml_discrepancy(two, one, 1) == doctest::Approx(0.30685).epsilon(1e-4));
    CHECK(ml_discrepancy(one, two, 1) == doctest::Approx(0.19315).epsilon(1e-4));
  }

  TEST_CASE("ml_discrepancy is zero at S = Sigma and positive elsewhere") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    for (int t = 0; t < 20; ++t) {
      Eigen::MatrixXd a(4, 4), b(4, 4);
      for (int i = 0; i < 16; ++i) {
        a(i) = z(rng);
        b(i) = z(rng);
      }
      const Eigen::MatrixXd s = a * a.transpose() + Eigen::MatrixXd::Identity(4, 4);
      const Eigen::MatrixXd sig = b * b.transpose() + Eigen::MatrixXd::Identity(4, 4);
      CHECK(std::abs(ml_discrepancy(s, s, 4)) < 1e-12);
      CHECK(ml_discrepancy(s, sig, 4) > 0.0);
    }
    Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(2, 2);
    CHECK_THROWS_AS(ml_discrepancy(bad, Eigen::MatrixXd::Identity(2, 2), 2), NumericError);
    CHECK_THROWS_AS(ml_discrepancy(Eigen::MatrixXd::Identity(2, 2), bad, 2), NumericError);
  }

  TEST_CASE("analytic gradient matches central differences") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> z(0.0, 0.3);
    struct Case {
      Design design;
      Identification ident;
    };
    for (const Case c : {Case{Design::Simple, Identification::UnitVariance},
                         Case{Design::MostComplex, Identification::UnitVariance},
                         Case{Design::Complex, Identification::MarkerLoading}}) {
      SimCondition cond;
      cond.design = c.design;
      cond.n_obs = 300;
      cond.seed = 5;
      const auto ds = generate(cond);
      const ModelSpec& spec = ds.params.spec;
      for (const auto& model : {spec, stage_decomposition(spec)[0]}) {
        MlProblem prob(model, sample_covariance(ds.data.select(model.variable_names())), c.ident);
        int checked = 0;
        for (int t = 0; t < 40 && checked < 7; ++t) {
          Eigen::VectorXd x = prob.start_values();
          for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += z(rng);
          if (!std::isfinite(prob.value(x))) continue;
          Eigen::VectorXd g;
          prob.value_and_gradient(x, g);
          const Eigen::VectorXd gn = numeric_gradient(prob, x);
          CHECK((g - gn).norm() / std::max(gn.norm(), 1e-8) < 1e-4);
          ++checked;
        }
        CHECK(checked == 7);
      }
    }
  }

  TEST_CASE("one-factor loadings recovered at N = 5000") {
    const Eigen::VectorXd lam = Eigen::VectorXd::Constant(4, 0.8);
    const Eigen::VectorXd th = Eigen::VectorXd::Constant(4, 0.36);
    const DataMatrix d = one_factor_data(lam, th, 5000, 17);
    const FittedModel fit = fit_cfa(parse_model("F =~ x1 + x2 + x3 + x4"), d);
    REQUIRE(fit.converged());
    for (int i = 0; i < 4; ++i) CHECK(std::abs(fit.estimates.lambda(i, 0) - 0.8) < 0.05);
    CHECK(fit.df == 2);
    CHECK(fit.chi_square == doctest::Approx((fit.n_obs - 1) * fit.discrepancy));
  }

  TEST_CASE("reconstruction: reported discrepancy equals recomputed value") {
    SimCondition cond;
    cond.design = Design::Complex;
    cond.n_obs = 500;
    cond.seed = 99;
    const auto ds = generate(cond);
    const FittedModel fit = fit_traditional(ds.params.spec, ds.data);
    REQUIRE(fit.converged());
    const double f = ml_discrepancy(fit.sample_cov, fit.estimates.implied(), 12);
    CHECK(std::abs(f - fit.discrepancy) < 1e-10);
  }

  TEST_CASE("saturated model fits exactly") {
    const Eigen::Vector3d lam(0.8, 0.7, 0.6);
    const DataMatrix d = one_factor_data(lam, Eigen::Vector3d(0.3, 0.5, 0.6), 400, 8);
    const FittedModel fit = fit_cfa(parse_model("F =~ x1 + x2 + x3"), d);
    REQUIRE(fit.converged());
    CHECK(fit.df == 0);
    CHECK(fit.chi_square < 1e-6);
  }

  TEST_CASE("unidentified model throws") {
    const DataMatrix d = one_factor_data(Eigen::Vector2d(0.8, 0.8), Eigen::Vector2d(0.3, 0.3), 100, 1);
    CHECK_THROWS_AS(fit_cfa(parse_model("F =~ x1 + x2"), d), ModelError);
  }

  TEST_CASE("too few rows give a status, not estimates") {
    const Eigen::VectorXd lam = Eigen::VectorXd::Constant(12, 0.7);
    const DataMatrix d = one_factor_data(lam, Eigen::VectorXd::Constant(12, 0.5), 10, 4);
    const ModelSpec spec = parse_model(
        "A =~ x1 + x2 + x3\nB =~ x4 + x5 + x6\nC =~ x7 + x8 + x9\nD =~ x10 + x11 + x12\n");
    const FittedModel fit = fit_cfa(spec, d);
    CHECK(fit.status != FitStatus::Converged);
    CHECK(!fit.message.empty());
  }

  TEST_CASE("traditional fit rejects a flat spec and fit_cfa rejects a hierarchical one") {
    SimCondition cond;
    cond.n_obs = 200;
    const auto ds = generate(cond);
    CHECK_THROWS_AS(fit_traditional(parse_model("F1 =~ V1 + V2 + V3"), ds.data), ModelError);
    CHECK_THROWS_AS(fit_cfa(ds.params.spec, ds.data), ModelError);
  }

  TEST_CASE("simple design at N = 5000: converged, positive second-order loadings") {
    SimCondition cond;
    cond.n_obs = 5000;
    cond.seed = 1234;
    const auto ds = generate(cond);
    const FittedModel fit = fit_traditional(ds.params.spec, ds.data);
    REQUIRE(fit.converged());
    const Eigen::Index g = fit.factor_index("G");
    for (const char* f : {"F1", "F2", "F3"}) CHECK(fit.estimates.beta(fit.factor_index(f), g) > 0.0);
  }

  TEST_CASE("duplicated columns: traditional fit reports failure") {
    SimCondition cond;
    cond.n_obs = 120;
    cond.seed = 2;
    const auto ds = generate(cond);
    Eigen::MatrixXd x = ds.data.values();
    x.col(5) = x.col(4);
    const DataMatrix dup(x, ds.data.column_names());
    const FittedModel fit = fit_traditional(ds.params.spec, dup);
    CHECK(fit.status != FitStatus::Converged);
  }

  TEST_CASE("scale consistency") {
    SimCondition cond;
    cond.design = Design::Complex;
    cond.n_obs = 800;
    cond.seed = 77;
    const auto ds = generate(cond);
    const DataMatrix doubled(ds.data.values() * 2.0, ds.data.column_names());
    const FittedModel a = fit_traditional(ds.params.spec, ds.data);
    const FittedModel b = fit_traditional(ds.params.spec, doubled);
    REQUIRE(a.converged());
    REQUIRE(b.converged());
    CHECK((standardize(a).lambda - standardize(b).lambda).cwiseAbs().maxCoeff() < 1e-5);
    CHECK((b.estimates.theta - 4.0 * a.estimates.theta).cwiseAbs().maxCoeff() < 1e-5 * b.estimates.theta.maxCoeff());
  }

  TEST_CASE("identical inputs give bitwise-identical fits") {
    SimCondition cond;
    cond.design = Design::MostComplex;
    cond.n_obs = 500;
    cond.seed = 5;
    const auto ds = generate(cond);
    const FittedModel a = fit_traditional(ds.params.spec, ds.data);
    const FittedModel b = fit_traditional(ds.params.spec, ds.data);
    CHECK(a.discrepancy == b.discrepancy);
    CHECK(a.estimates.lambda == b.estimates.lambda);
    CHECK(a.estimates.theta == b.estimates.theta);
    CHECK(a.iterations == b.iterations);
  }

  TEST_CASE("marker identification reproduces the unit-variance implied covariance") {
    SimCondition cond;
    cond.design = Design::Complex;
    cond.n_obs = 1000;
    cond.seed = 21;
    const auto ds = generate(cond);
    FitOptions marker;
    marker.identification = Identification::MarkerLoading;
    const FittedModel a = fit_traditional(ds.params.spec, ds.data);
    const FittedModel b = fit_traditional(ds.params.spec, ds.data, marker);
    REQUIRE(a.converged());
    REQUIRE(b.converged());
    CHECK(a.df == b.df);
    CHECK(std::abs(a.discrepancy - b.discrepancy) < 1e-6);
    CHECK(b.estimates.lambda(0, 0) == 1.0);
  }

  TEST_CASE("config parsing") {
    const FitOptions o = parse_fit_options(
        "# estimator settings\nmax_iter = 50\ntol_grad = 1e-5\n tol_f=1e-8 \nstandardize = true\n"
        "identification = marker\n");
    CHECK(o.max_iter == 50);
    CHECK(o.tol_grad == 1e-5);
    CHECK(o.tol_f == 1e-8);
    CHECK(o.standardize);
    CHECK(o.identification == Identification::MarkerLoading);
    CHECK_THROWS(parse_fit_options("bogus = 1"));
    CHECK_THROWS(parse_fit_options("max_iter = abc"));
    CHECK_THROWS(parse_fit_options("max_iter"));
  }

  TEST_CASE("fit status strings round-trip") {
    for (auto s : {FitStatus::Converged, FitStatus::NonConverged, FitStatus::Inadmissible})
      CHECK(fit_status_from_string(to_string(s)) == s);
  }
}
