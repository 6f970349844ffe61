#include "parastab/actuators.hpp"

#include <cmath>
#include <numbers>

namespace parastab {

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gram_schmidt_m(
    const Eigen::MatrixXd& vectors, const SpMat& M_ii) {
  int n = static_cast<int>(vectors.rows());
  int m = static_cast<int>(vectors.cols());
  if (M_ii.rows() != n)
    throw DimensionMismatch("gram_schmidt_m: matrix/vector size mismatch");
  Eigen::MatrixXd Q(n, m), F = Eigen::MatrixXd::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    Vec v = vectors.col(j);
    double in_norm = std::sqrt(v.dot(M_ii * v));
    for (int i = 0; i < j; ++i) {
      F(i, j) = Q.col(i).dot(M_ii * v);
      v -= F(i, j) * Q.col(i);
    }
    double r = std::sqrt(v.dot(M_ii * v));
    if (r <= 1e-12 * in_norm || r == 0.0) throw RankDeficient(j + 1);
    F(j, j) = r;
    Q.col(j) = v / r;
  }
  return {Q, F};
}

InternalActuatorSet build_internal_actuators(const FemOperators& ops, Rect omega,
                                             int m, int n, const Vec& chi,
                                             bool unrestricted) {
  if (m < 1 || n < 1) throw std::invalid_argument("cell counts must be positive");
  if (chi.size() != 0 && chi.size() != ops.n_points())
    throw DimensionMismatch("build_internal_actuators: chi length mismatch");
  InternalActuatorSet set;
  set.omega = omega;
  set.m = m;
  set.n = n;
  set.unrestricted = unrestricted;

  int n_i = ops.n_i;
  int M = m * n;
  double wx = (omega.x1 - omega.x0) / m;
  double wy = (omega.y1 - omega.y0) / n;
  set.indicators = Eigen::MatrixXd::Zero(n_i, M);
  set.chi_mask = Vec::Zero(n_i);
  for (int p = 0; p < n_i; ++p) {
    double x = ops.points[p].x, y = ops.points[p].y;
    if (x < omega.x0 || x > omega.x1 || y < omega.y0 || y > omega.y1) continue;
    // Half-open cells [lo, hi); the last cell in each direction is closed.
    int ci = std::min(static_cast<int>(std::floor((x - omega.x0) / wx)), m - 1);
    int cj = std::min(static_cast<int>(std::floor((y - omega.y0) / wy)), n - 1);
    set.indicators(p, cj * m + ci) = 1.0;
    set.chi_mask[p] = chi.size() ? chi[p] : 1.0;
  }
  for (int c = 0; c < M; ++c)
    if (set.indicators.col(c).sum() == 0.0) throw EmptyCell(c + 1);

  auto [Q, F] = gram_schmidt_m(set.indicators, ops.Mb.ii);
  set.S_M = Q;
  set.gs_factor = F;
  if (unrestricted) {
    set.R_in = Eigen::MatrixXd(set.chi_mask.asDiagonal());
  } else {
    set.R_in = set.chi_mask.asDiagonal() * set.S_M;
  }
  return set;
}

BoundaryActuatorSet build_boundary_actuators(const FemOperators& ops, double theta0,
                                             double theta1, int M, double varsigma,
                                             double nu, bool scaled_pi) {
  if (M < 1) throw std::invalid_argument("need at least one boundary actuator");
  if (!(0 <= theta0 && theta0 < theta1 && theta1 <= 2 * std::numbers::pi))
    throw std::invalid_argument("need 0 <= theta0 < theta1 <= 2*pi");
  if (nu <= 0) throw std::invalid_argument("nu must be positive");
  BoundaryActuatorSet set;
  set.theta0 = theta0;
  set.theta1 = theta1;
  set.varsigma = varsigma;
  set.nu = nu;
  set.scaled_pi = scaled_pi;

  int n_i = ops.n_i, n_b = ops.n_b, sp = ops.n_points();
  set.psi_traces = Eigen::MatrixXd::Zero(n_b, M);
  for (int b = 0; b < n_b; ++b) {
    double th = ops.theta[n_i + b];
    if (th <= theta0 || th >= theta1) continue;
    double ratio = (th - theta0) / (theta1 - theta0);
    if (scaled_pi) ratio *= std::numbers::pi;
    for (int i = 0; i < M; ++i) set.psi_traces(b, i) = std::sin((i + 1) * ratio);
  }

  SpMat A = SpMat(nu * ops.Sb.ii) + SpMat(varsigma * ops.Mb.ii);
  SpMat B = SpMat(nu * ops.Sb.ib) + SpMat(varsigma * ops.Mb.ib);
  set.psi_extensions = Eigen::MatrixXd::Zero(sp, M);
  set.B_psi_bar = Eigen::MatrixXd::Zero(n_i, M);
  for (int i = 0; i < M; ++i) {
    Vec trace = set.psi_traces.col(i);
    Vec interior = solve_spd(A, Vec(-(B * trace)));
    set.psi_extensions.col(i).head(n_i) = interior;
    set.psi_extensions.col(i).tail(n_b) = trace;
    set.B_psi_bar.col(i) = interior + solve_spd(ops.Mb.ii, Vec(ops.Mb.ib * trace));
  }
  set.R_bo = Eigen::MatrixXd::Zero(n_i + M, M);
  set.R_bo.topRows(n_i) = set.B_psi_bar;
  set.R_bo.bottomRows(M).setIdentity();
  return set;
}

}  // namespace parastab
