#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "parastab/config.hpp"
#include "parastab/riccati.hpp"

using namespace parastab;

namespace {

Mat scalar(double v) {
  Mat m(1, 1);
  m << v;
  return m;
}

double are_residual(const Mat& Pi, const Mat& X, const Mat& R, const Mat& Q) {
  return (Pi * X + X.transpose() * Pi - Pi * R * R.transpose() * Pi + Q).norm();
}

}  // namespace

TEST_CASE("Lyapunov solver oracles") {
  CHECK(solve_lyapunov(scalar(-2), scalar(4))(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

  Mat Q0(2, 2);
  Q0 << 3, 1, 1, 2;
  const Mat P = solve_lyapunov(-Mat::Identity(2, 2), Q0);
  CHECK((P - Q0 / 2).lpNorm<Eigen::Infinity>() < 1e-12);

  Mat A = Mat::Zero(2, 2);
  A(0, 0) = -1;
  A(1, 1) = -3;
  const Mat P2 = solve_lyapunov(A, Mat::Ones(2, 2));
  Mat expected(2, 2);
  expected << 0.5, 0.25, 0.25, 1.0 / 6.0;
  CHECK((P2 - expected).lpNorm<Eigen::Infinity>() < 1e-12);

  // eigenvalues summing to zero have no solution
  Mat bad = Mat::Zero(2, 2);
  bad(0, 0) = 1;
  bad(1, 1) = -1;
  CHECK_THROWS_AS(solve_lyapunov(bad, Mat::Ones(2, 2)), SingularLyapunov);
}

TEST_CASE("ARE scalar oracles") {
  CHECK(solve_are(scalar(-1), scalar(1), scalar(3))(0, 0) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(solve_are(scalar(0), scalar(1), scalar(1))(0, 0) ==
        doctest::Approx(1.0).epsilon(1e-10));
  Mat Q0(2, 2);
  Q0 << 3, 1, 1, 2;
  const Mat P = solve_are(-Mat::Identity(2, 2), Mat::Zero(2, 1), Q0);
  CHECK((P - Q0 / 2).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("homotopy scalar chain") {
  // X=-1, C=1, H0=1, target R=2: endpoint solves -2pi - 4pi^2 + 1 = 0
  const Mat Pi = homotopy_init(scalar(-1), scalar(2), scalar(1), scalar(1));
  CHECK(Pi(0, 0) == doctest::Approx((-1.0 + std::sqrt(5.0)) / 4.0).epsilon(1e-10));
  // target equal to H0: endpoint equals the tau=0 solution
  const Mat Pi0 = solve_are(scalar(-1), scalar(1), scalar(1));
  const Mat Pi1 = homotopy_init(scalar(-1), scalar(1), scalar(1), scalar(1));
  CHECK(Pi1(0, 0) == doctest::Approx(Pi0(0, 0)).epsilon(1e-10));
}

TEST_CASE("backward DRE sweep: exact linear solution and stationary fixed point") {
  // X=0, R=0, C=1: Pi(t) = T - t, reproduced exactly by the scheme
  RiccatiProblem pb;
  pb.X.assign(3, scalar(0));
  pb.R = Mat::Zero(1, 1);
  pb.C = scalar(1);
  pb.k = 0.5;
  const RiccatiPath path = solve_dre_backward(pb, scalar(0));
  REQUIRE(path.Pi.size() == 3);
  CHECK(path.Pi[2](0, 0) == doctest::Approx(0.0));
  CHECK(path.Pi[1](0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(path.Pi[0](0, 0) == doctest::Approx(1.0).epsilon(1e-12));

  // stationary data: the ARE solution is a fixed point of the sweep
  const Mat X = scalar(-1), R = scalar(1), Q = scalar(3);
  const Mat Pi_inf = solve_are(X, R, Q);
  RiccatiProblem pb2;
  pb2.X.assign(5, X);
  pb2.R = R;
  pb2.C = Mat::Constant(1, 1, std::sqrt(3.0));
  pb2.k = 0.25;
  const RiccatiPath path2 = solve_dre_backward(pb2, Pi_inf);
  for (const Mat& Pi : path2.Pi)
    CHECK(std::abs(Pi(0, 0) - Pi_inf(0, 0)) < 1e-8);
}

TEST_CASE("CN halving on the scalar DRE is second order") {
  // X=-1, R=1, C=1, Pi(T)=0; closed form via the Bernoulli/Riccati solution
  const double T = 1.0;
  const double sq = std::sqrt(2.0);
  auto exact = [&](double t) {
    // dPi/dt = Pi^2 + 2Pi - 1 backward from Pi(T)=0
    const double s = T - t;
    const double num = std::sinh(sq * s);
    const double den = sq * std::cosh(sq * s) + std::sinh(sq * s);
    return num / den;
  };
  double errors[2];
  int idx = 0;
  for (int N : {8, 16}) {
    RiccatiProblem pb;
    pb.X.assign(N + 1, scalar(-1));
    pb.R = scalar(1);
    pb.C = scalar(1);
    pb.k = T / N;
    const RiccatiPath path = solve_dre_backward(pb, scalar(0));
    errors[idx++] = std::abs(path.Pi[0](0, 0) - exact(0.0));
  }
  CHECK(errors[0] / errors[1] == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("disk problem builders satisfy structural identities") {
  const FemOperators ops = assemble(generate_disk_mesh(3));
  const CoefficientField coeff = family_coefficients(1, 1, 1, 1, 1, 1);
  const double nu = 0.25, lambda = 2.0;

  const Mat C = output_matrix(ops, nu);
  CHECK((C.transpose() * C - nu * Eigen::MatrixXd(ops.Sb.ii)).lpNorm<Eigen::Infinity>() <
        1e-10);

  const BoundaryActuatorSet bset =
      build_boundary_actuators(ops, M_PI, 1.25 * M_PI, 2, 10.0, nu);
  const RiccatiProblem pb =
      boundary_riccati_problem(ops, coeff, bset, lambda, nu, 1.0, 4);
  REQUIRE(pb.X.size() == 5);
  const int n = ops.n_i;
  CHECK(pb.X[0].rows() == n + 2);
  // lower-left block zero, lower-right -(varsigma - lambda/2) I
  CHECK(pb.X[0].block(n, 0, 2, n).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((pb.X[0].block(n, n, 2, 2) + (10.0 - lambda / 2) * Mat::Identity(2, 2))
            .lpNorm<Eigen::Infinity>() == 0.0);
  // input matrix [-B̄_Ψ; I]: κ is driven directly, v through the lifting
  CHECK(pb.R.rows() == n + 2);
  CHECK((pb.R.topRows(n) + bset.B_psi_bar).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((pb.R.bottomRows(2) - Mat::Identity(2, 2)).lpNorm<Eigen::Infinity>() == 0.0);

  // H0 square roots
  const Mat H0 = homotopy_h0(ops, 2);
  const Mat M_ii = Eigen::MatrixXd(ops.Mb.ii);
  CHECK((H0.topLeftCorner(n, n) * H0.topLeftCorner(n, n).transpose() * M_ii -
         Mat::Identity(n, n))
            .lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK((H0.bottomRightCorner(2, 2) - Mat::Identity(2, 2)).lpNorm<Eigen::Infinity>() ==
        0.0);
}

TEST_CASE("feedback matrices") {
  const FemOperators ops = assemble(generate_disk_mesh(3));
  const InternalActuatorSet iset =
      build_internal_actuators(ops, Rect{-0.7, 0.7, -0.7, 0.7}, 1, 1);
  const Mat Pi = Mat::Identity(ops.n_i, ops.n_i);
  const Mat F = internal_feedback_matrix(iset, Pi);
  CHECK((F - iset.R_in * iset.R_in.transpose()).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(internal_feedback_matrix(iset, Mat::Zero(ops.n_i, ops.n_i)).norm() == 0.0);
}
