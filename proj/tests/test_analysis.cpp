#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "parastab/analysis.hpp"

using namespace parastab;

TEST_CASE("decay metrics") {
  const double lambda = 2.0, k = 0.5;
  SUBCASE("exact decay has weighted sup 1") {
    std::vector<double> norms(9);
    for (int j = 0; j < 9; ++j) norms[j] = std::exp(-lambda * k * j);
    const DecayMetrics dm = decay_metrics(norms, lambda, k);
    CHECK(dm.weighted_sup == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dm.final_ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dm.stabilized);
  }
  SUBCASE("two-point example") {
    const std::vector<double> norms = {1.0, 4.0 * std::exp(-lambda * k)};
    const DecayMetrics dm = decay_metrics(norms, lambda, k);
    CHECK(dm.weighted_sup == doctest::Approx(4.0).epsilon(1e-12));
  }
  SUBCASE("blow-up gives an infinite sentinel") {
    const std::vector<double> norms = {1.0, std::numeric_limits<double>::infinity()};
    const DecayMetrics dm = decay_metrics(norms, lambda, k);
    CHECK(std::isinf(dm.weighted_sup));
    CHECK_FALSE(dm.stabilized);
  }
  SUBCASE("zero initial norm is an error") {
    CHECK_THROWS_AS(decay_metrics(std::vector<double>{0.0, 1.0}, lambda, k),
                    std::invalid_argument);
  }
}

TEST_CASE("m_lambda") {
  SUBCASE("exact decay gives zero") {
    std::vector<double> norms(11);
    for (int j = 0; j < 11; ++j) norms[j] = std::exp(-3.0 * 0.1 * j);
    CHECK(m_lambda(norms, 3.0, 0.1) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("two-point overshoot") {
    const std::vector<double> norms = {1.0, 4.0 * std::exp(-2.0)};
    CHECK(m_lambda(norms, 2.0, 1.0) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  }
  SUBCASE("monotone increasing r gives r(T) - r(0)") {
    const std::vector<double> norms = {1.0, 2.0, 5.0, 11.0};
    const double k = 0.25, lambda = 1.0;
    CHECK(m_lambda(norms, lambda, k) ==
          doctest::Approx(lambda * 3 * k + std::log(11.0)).epsilon(1e-12));
  }
  SUBCASE("nonpositive norms rejected") {
    CHECK_THROWS_AS(m_lambda({1.0, 0.0}, 1.0, 0.1), std::invalid_argument);
  }
  SUBCASE("nonnegative always") {
    const std::vector<double> norms = {1.0, 0.1, 0.5, 0.01, 0.2};
    CHECK(m_lambda(norms, 0.7, 0.3) >= 0.0);
  }
}

TEST_CASE("cost series") {
  Trajectory traj;
  traj.N_t = 2;
  traj.k = 0.5;
  traj.T = 1.0;
  traj.z = Eigen::MatrixXd::Zero(4, 3);
  traj.z(0, 0) = 1.0;  // e1 at t=0
  traj.z(1, 2) = 2.0;
  RiccatiPath path = RiccatiPath::constant(Mat::Identity(3, 3), 2, 0.5);
  // state = interior part (3 of 4 nodal values), no kappa
  const std::vector<double> cost = cost_series(path, traj);
  REQUIRE(cost.size() == 3);
  CHECK(cost[0] == doctest::Approx(1.0));
  CHECK(cost[1] == doctest::Approx(0.0));
  CHECK(cost[2] == doctest::Approx(4.0));

  // boundary variant: state = [interior; kappa]
  traj.kappa = Eigen::MatrixXd::Ones(1, 3);
  RiccatiPath bpath = RiccatiPath::constant(2.0 * Mat::Identity(4, 4), 2, 0.5);
  const std::vector<double> bcost = cost_series(bpath, traj);
  CHECK(bcost[0] == doctest::Approx(2.0 * (1.0 + 1.0)));
  CHECK(bcost[1] == doctest::Approx(2.0));
}

TEST_CASE("convergence ratios") {
  const std::vector<double> r = convergence_ratios({1.0, 0.25, 0.0625});
  REQUIRE(r.size() == 2);
  CHECK(r[0] == doctest::Approx(4.0));
  CHECK(r[1] == doctest::Approx(4.0));
  CHECK(convergence_ratios({1.0, 0.5}).front() == doctest::Approx(2.0));
  CHECK_THROWS_AS(convergence_ratios({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(convergence_ratios({1.0, -0.5}), std::invalid_argument);
}
