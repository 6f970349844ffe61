#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "parastab/estimates.hpp"

using namespace parastab;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("theta formula") {
  CHECK(theta(1, 0, 0, 2) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(theta(2, 1, 1, 2) == doctest::Approx(10.5).epsilon(1e-12));
  CHECK(theta(100, 0, 0, 3) == doctest::Approx(1.01).epsilon(1e-15));
  CHECK(theta(0.5, 2, 3, 1) >= 1.0);
  CHECK_THROWS_AS(theta(0, 1, 1, 2), std::invalid_argument);
}

TEST_CASE("T_star and Upsilon") {
  TheoryParams p;
  p.d = 2;
  p.D_hat = 1;
  p.D_rc = 1;
  p.n_W = 1;
  p.n_a = 1;
  p.n_b = 0;
  const TStarUpsilon tu = t_star_upsilon(p);
  CHECK(tu.T_star == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

  TheoryParams q;  // all norms zero: infinite window
  const TStarUpsilon tz = t_star_upsilon(q);
  CHECK(std::isinf(tz.T_star));
  CHECK(tz.upsilon == doctest::Approx(2.0 * std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("unit ball volumes") {
  CHECK(ball_volume(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(ball_volume(2) == doctest::Approx(kPi).epsilon(1e-14));
  CHECK(ball_volume(3) == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-14));
  CHECK(ball_volume(4) == doctest::Approx(kPi * kPi / 2.0).epsilon(1e-14));
}

TEST_CASE("actuator bounds worked example") {
  TheoryParams p;
  p.d = 2;
  p.D_rc = 1;
  p.D_hat = 1;
  p.n_W = 1;
  p.n_a = 0;
  p.n_b = 0;
  p.domain_volume = kPi;
  p.w_R_volume = 1.0 / 6.0;
  p.l_bar = 0.5;
  const ActuatorBounds ab = actuator_bounds(p);
  CHECK(ab.D_d == doctest::Approx(12.0 * kPi).epsilon(1e-12));
  CHECK(ab.M_simple_raw == doctest::Approx(2.0 * std::exp(1.0)).epsilon(1e-12));
  CHECK(ab.M_simple == 6);
  CHECK(ab.T_star_part == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("monotonicity in the coefficient norms") {
  TheoryParams p;
  p.d = 2;
  p.domain_volume = kPi;
  p.w_R_volume = 1.0 / 6.0;
  p.l_bar = 0.5;
  double prev_simple = -1, prev_eig = -1;
  for (double nw : {0.5, 1.0, 2.0, 4.0}) {
    p.n_W = nw;
    p.n_a = nw;
    p.n_b = nw;
    const ActuatorBounds ab = actuator_bounds(p);
    CHECK(ab.M_simple_raw > prev_simple);
    CHECK(ab.M_eig_raw > prev_eig);
    prev_simple = ab.M_simple_raw;
    prev_eig = ab.M_eig_raw;
  }
  // log-log slope d for M_simple in n_W
  p.n_a = p.n_b = 0;
  p.n_W = 1;
  const double m1 = actuator_bounds(p).M_simple_raw;
  p.n_W = 10;
  const double m10 = actuator_bounds(p).M_simple_raw;
  CHECK(std::log10(m10 / m1) == doctest::Approx(2.0).epsilon(1e-12));
}
