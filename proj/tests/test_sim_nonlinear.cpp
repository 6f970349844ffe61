#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "parastab/sim_nonlinear.hpp"

using namespace parastab;

TEST_CASE("manufactured forcing") {
  SUBCASE("zero reference gives zero data") {
    const auto [f0, g] = manufactured_forcing(parse_expr("0"), 0.2, -2, -1, -3);
    for (double t : {0.0, 1.0})
      for (double x : {-0.5, 0.3}) {
        CHECK(eval(f0, t, x, -x) == 0.0);
        CHECK(eval(g, t, x, -x) == 0.0);
      }
  }
  SUBCASE("reference trajectory") {
    const double nu = 0.2, c1 = -2, c2 = -1, c3 = -3;
    const Expr yhat = parse_expr("(2*x1^3 + x2^2)*sin(t)");
    const auto [f0, g] = manufactured_forcing(yhat, nu, c1, c2, c3);
    for (double t : {0.4, 1.7})
      for (double x1 : {-0.6, 0.3})
        for (double x2 : {0.1, -0.5}) {
          const double y = (2 * x1 * x1 * x1 + x2 * x2) * std::sin(t);
          const double dy_t = (2 * x1 * x1 * x1 + x2 * x2) * std::cos(t);
          const double lap = (12 * x1 + 2) * std::sin(t);
          const double d1 = 6 * x1 * x1 * std::sin(t);
          const double d2 = 2 * x2 * std::sin(t);
          const double expected =
              -(dy_t - nu * lap + c3 * y * y * y + c2 * y * y + c1 * y + y * (d1 + d2));
          CHECK(eval(f0, t, x1, x2) == doctest::Approx(expected).epsilon(1e-12));
          CHECK(eval(g, t, x1, x2) == doctest::Approx(y).epsilon(1e-14));
        }
  }
  SUBCASE("abs in the reference is rejected") {
    CHECK_THROWS_AS(manufactured_forcing(parse_expr("abs(x1)"), 0.2, 0, 0, 0),
                    UnsupportedDerivative);
  }
}

TEST_CASE("discrete nonlinearity") {
  const FemOperators ops = assemble(generate_disk_mesh(2));
  const int sp = ops.n_points();
  CHECK(nonlinear_term(ops, Vec::Zero(sp), 1, 2, 3).norm() == 0.0);

  const Vec ones = Vec::Ones(sp);
  const Vec expected = ops.M * ones + 0.5 * (ops.G1 * ones + ops.G2 * ones);
  CHECK((nonlinear_term(ops, ones, 1, 0, 0) - expected).lpNorm<Eigen::Infinity>() <
        1e-14);

  // odd/even split: with c2 = 0, N(-y) = -M(c3 y^3 + c1 y) + (G y^2)/2 terms keep sign
  Vec y(sp);
  for (int i = 0; i < sp; ++i) y[i] = std::sin(1.0 + i);
  const Vec y2 = y.array().square().matrix();
  const Vec y3 = y.array().cube().matrix();
  const Vec expected_neg =
      -(ops.M * (3.0 * y3 + 1.0 * y)) + 0.5 * (ops.G1 * y2 + ops.G2 * y2);
  CHECK((nonlinear_term(ops, -y, 1, 0, 3) - expected_neg).lpNorm<Eigen::Infinity>() <
        1e-12);
}

TEST_CASE("linearized coefficients along the reference") {
  const NonlinearProblem np =
      make_nonlinear_problem(parse_expr("(2*x1^3 + x2^2)*sin(t)"), 0.2, -2, -1, -3);
  const CoefficientField lin = linearized_coefficients(np);
  for (double t : {0.3, 1.1}) {
    const double x1 = 0.4, x2 = -0.2;
    const double y = (2 * x1 * x1 * x1 + x2 * x2) * std::sin(t);
    CHECK(eval(lin.a, t, x1, x2) == doctest::Approx(-2 - 2 * y - 9 * y * y).epsilon(1e-12));
    CHECK(eval(lin.b1, t, x1, x2) == doctest::Approx(y).epsilon(1e-14));
    CHECK(eval(lin.b2, t, x1, x2) == doctest::Approx(y).epsilon(1e-14));
  }
}

TEST_CASE("epsilon = 0 tracks the manufactured solution under all three schemes") {
  const FemOperators ops = assemble(refine(generate_disk_mesh(2), true));
  const NonlinearProblem np =
      make_nonlinear_problem(parse_expr("(t^2 - 2*t)*x1^3*sin(x2)^2"), 0.2, -2, -1, -3);
  const int N_t = 40;
  const double T = 1.0;
  const Vec y0 = eval_at_nodes(np.yhat, ops.points, 0.0);

  for (Scheme scheme : {Scheme::Extrapolation, Scheme::Heun, Scheme::Newton}) {
    NonlinearOptions opt;
    opt.scheme = scheme;
    const Trajectory traj = simulate_nonlinear(ops, np, T, N_t, y0, opt);
    REQUIRE_FALSE(traj.blow_up);
    double max_err = 0;
    for (int j = 0; j <= N_t; ++j) {
      const Vec yhat = eval_at_nodes(np.yhat, ops.points, traj.time_at(j));
      max_err = std::max(max_err, std::sqrt(h_norm_sq(ops, traj.z.col(j) - yhat)));
    }
    CHECK(max_err < 0.05);  // discretization error on a coarse mesh
    if (scheme == Scheme::Newton) {
      REQUIRE_FALSE(traj.newton_iters.empty());
      for (int it : traj.newton_iters) CHECK(it >= 1);
    }
  }
}

TEST_CASE("extrapolation error halves ~4x with k (time dominated)") {
  const FemOperators ops = assemble(refine(generate_disk_mesh(2), true));
  // stiff-in-time reference keeps the temporal error dominant on this mesh
  const NonlinearProblem np =
      make_nonlinear_problem(parse_expr("sin(4*t)*(1 - x1^2 - x2^2)"), 0.2, -2, -1, -3);
  const double T = 1.0;
  double errs[2];
  int idx = 0;
  for (int N_t : {40, 80}) {
    const Vec y0 = eval_at_nodes(np.yhat, ops.points, 0.0);
    const Trajectory a = simulate_nonlinear(ops, np, T, N_t, y0, {});
    NonlinearOptions newton;
    newton.scheme = Scheme::Newton;
    const Trajectory b = simulate_nonlinear(ops, np, T, N_t, y0, newton);
    std::vector<double> s(N_t + 1);
    for (int j = 0; j <= N_t; ++j)
      s[j] = std::sqrt(h_norm_sq(ops, a.z.col(j) - b.z.col(j)));
    errs[idx++] = std::sqrt(bochner_norm_sq(s, T / N_t));
  }
  CHECK(errs[0] / errs[1] > 2.0);  // second-order pair: discrepancy shrinks fast
}
