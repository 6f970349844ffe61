#include "parastab/riccati.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace parastab {

namespace {

using CMat = Eigen::MatrixXcd;

double spectral_abscissa(const Mat& A) {
  Eigen::EigenSolver<Mat> es(A, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

double min_real_eigenvalue(const Mat& A) {
  Eigen::EigenSolver<Mat> es(A, false);
  return es.eigenvalues().real().minCoeff();
}

bool is_psd(const Mat& P, double tol) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (P + P.transpose()),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

double are_residual(const Mat& X, const Mat& R, const Mat& Q, const Mat& Pi) {
  Mat res = Pi * X + X.transpose() * Pi - Pi * (R * (R.transpose() * Pi)) + Q;
  return res.norm();
}

// Lyapunov-shift (Bass) seed: W solves (X+βI)W + W(X+βI)ᵀ = 2RRᵀ with β
// exceeding the spectral radius band of X; then X − RRᵀW⁻¹ is stable and
// Π₀ = W⁻¹ is a stabilizing start for Newton–Kleinman.
Mat bass_seed(const Mat& X, const Mat& R) {
  double beta = std::max({-min_real_eigenvalue(X), spectral_abscissa(X), 0.0}) + 1.0;
  Mat shifted = -(X + beta * Mat::Identity(X.rows(), X.cols())).transpose();
  Mat W = solve_lyapunov(shifted, Mat(2.0 * R * R.transpose()));
  Eigen::LDLT<Mat> ldlt(0.5 * (W + W.transpose()));
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-14 * W.norm())
    throw NoStabilizingSeed("Lyapunov-shift seed is singular (system not stabilizable?)");
  return ldlt.solve(Mat::Identity(X.rows(), X.cols()));
}

}  // namespace

Mat solve_lyapunov(const Mat& A, const Mat& Q) {
  int n = static_cast<int>(A.rows());
  if (A.cols() != n || Q.rows() != n || Q.cols() != n)
    throw DimensionMismatch("solve_lyapunov: square matrices of equal size required");
  Eigen::ComplexSchur<Mat> schur(A);
  if (schur.info() != Eigen::Success)
    throw SingularLyapunov("Schur decomposition failed");
  const CMat& U = schur.matrixU();
  const CMat& T = schur.matrixT();
  CMat Qt = U.adjoint() * Q * U;
  CMat Pt(n, n);
  // T^H P̃ + P̃ T + Q̃ = 0, solved column-forward: column k only couples to
  // earlier columns through the strictly upper part of T.
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXcd rhs = -Qt.col(k);
    for (int i = 0; i < k; ++i) rhs -= T(i, k) * Pt.col(i);
    CMat lhs = T.adjoint();
    lhs.diagonal().array() += T(k, k);
    for (int j = 0; j < n; ++j)
      if (std::abs(lhs(j, j)) < 1e-13 * (1.0 + std::abs(T(j, j))))
        throw SingularLyapunov("eigenvalue pair sums to zero");
    Pt.col(k) = lhs.triangularView<Eigen::Lower>().solve(rhs);
  }
  Mat P = (U * Pt * U.adjoint()).real();
  return 0.5 * (P + P.transpose());
}

Mat solve_are(const Mat& X, const Mat& R, const Mat& Q, const Mat* seed,
              int* iters_out, double* residual_out) {
  int n = static_cast<int>(X.rows());
  Mat Qs = 0.5 * (Q + Q.transpose());
  double tol = 1e-8 * std::max(1.0, Qs.norm());
  Mat Pi;
  if (seed) {
    Pi = 0.5 * (*seed + seed->transpose());
  } else if (spectral_abscissa(X) < 0) {
    Pi = Mat::Zero(n, n);
  } else {
    Pi = bass_seed(X, R);
  }
  double res = are_residual(X, R, Qs, Pi);
  int it = 0;
  while (res > tol) {
    if (++it > 100) throw MaxIterations("Newton-Kleinman did not converge in 100 steps");
    Mat RRtPi = R * (R.transpose() * Pi);
    Mat Acl = X - RRtPi;
    Mat Pi_next = solve_lyapunov(Acl, Mat(Qs + Pi * RRtPi));
    Pi = Pi_next;
    res = are_residual(X, R, Qs, Pi);
  }
  if (iters_out) *iters_out = it;
  if (residual_out) *residual_out = res;
  // Guard against convergence to a non-stabilizing branch: the meaningful
  // solution closes the loop stably, and a bad seed can silently miss it.
  if (R.size() > 0) {
    Mat Acl = X - R * (R.transpose() * Pi);
    if (spectral_abscissa(Acl) > 1e-8 * std::max(1.0, Acl.norm()))
      throw NoStabilizingSeed("Newton-Kleinman converged to a non-stabilizing branch");
  }
  return Pi;
}

Mat homotopy_init(const Mat& X_T, const Mat& R_target, const Mat& C, const Mat& H0,
                  int N_h) {
  if (N_h < 1) throw std::invalid_argument("homotopy needs at least one step");
  int n = static_cast<int>(X_T.rows());
  Mat Q = C.transpose() * C;
  Mat R_pad = Mat::Zero(n, n);
  R_pad.leftCols(R_target.cols()) = R_target;
  for (int steps = N_h;; steps *= 2) {
    try {
      Mat Pi;
      bool have = false;
      for (int s = 0; s <= steps; ++s) {
        double tau = static_cast<double>(s) / steps;
        Mat H = (1 - tau) * (1 - tau) * H0 + tau * tau * R_pad;
        Pi = solve_are(X_T, H, Q, have ? &Pi : nullptr);
        have = true;
      }
      return Pi;
    } catch (const std::runtime_error& e) {
      if (steps >= 64)
        throw NoStabilizingSeed(std::string("homotopy failed at finest step count: ") +
                                e.what());
    }
  }
}

RiccatiPath solve_dre_backward(const RiccatiProblem& problem, const Mat& Pi_T) {
  int N_t = problem.steps();
  int n = static_cast<int>(Pi_T.rows());
  double k = problem.k;
  const Mat& R = problem.R;
  Mat Q2 = 2.0 * problem.C.transpose() * problem.C;
  RiccatiPath path;
  path.k = k;
  path.Pi.assign(N_t + 1, Mat());
  path.Pi[N_t] = 0.5 * (Pi_T + Pi_T.transpose());
  path.newton_iters.assign(N_t, 0);
  path.residuals.assign(N_t, 0.0);
  Mat I = Mat::Identity(n, n);
  for (int j = N_t - 1; j >= 0; --j) {
    const Mat& Pn = path.Pi[j + 1];
    const Mat& Xn = problem.X[j + 1];
    Mat Qt = Q2 + (2.0 / k) * Pn + Pn * Xn + Xn.transpose() * Pn -
             Pn * (R * (R.transpose() * Pn));
    Mat At = problem.X[j] - (1.0 / k) * I;
    int iters = 0;
    double res = 0;
    path.Pi[j] = solve_are(At, R, Qt, &Pn, &iters, &res);
    path.newton_iters[j] = iters;
    path.residuals[j] = res;
    // tolerate the mild transient Crank-Nicolson overshoot on stiff modes;
    // a genuine branch loss grows far past this and still trips the guard
    if (!is_psd(path.Pi[j], 1e-3 * std::max(1.0, path.Pi[j].norm())))
      throw LossOfPositivity(j);
  }
  return path;
}

namespace {

Mat k_r_ii_cached(const FemOperators& ops, const Eigen::LLT<Mat>& M_llt,
                  const Vec& a_bar, const Vec& b1_bar, const Vec& b2_bar, double r) {
  Mat K = M_llt.solve(Mat(convection_matrix(ops, b1_bar, b2_bar)));
  K += Mat((a_bar.array() - r / 2).matrix().asDiagonal());
  return K.topLeftCorner(ops.n_i, ops.n_i);
}

}  // namespace

Mat k_r_ii(const FemOperators& ops, const Vec& a_bar, const Vec& b1_bar,
           const Vec& b2_bar, double r) {
  return k_r_ii_cached(ops, Eigen::LLT<Mat>(Mat(ops.M)), a_bar, b1_bar, b2_bar, r);
}

Mat diffusion_state_matrix(const FemOperators& ops, double nu) {
  Mat S = Mat(ops.Sb.ii);
  return -nu * Eigen::LLT<Mat>(Mat(ops.Mb.ii)).solve(S);
}

Mat output_matrix(const FemOperators& ops, double nu, bool use_mass_output) {
  Mat A = use_mass_output ? Mat(ops.Mb.ii) : Mat(ops.Sb.ii);
  Mat U = Eigen::LLT<Mat>(A).matrixU();
  return use_mass_output ? U : Mat(std::sqrt(nu) * U);
}

Mat homotopy_h0(const FemOperators& ops, int extra_identity) {
  int n_i = ops.n_i;
  Mat L = Eigen::LLT<Mat>(Mat(ops.Mb.ii)).matrixL();
  Mat H0 = Mat::Zero(n_i + extra_identity, n_i + extra_identity);
  // (L⁻ᵀ)(L⁻ᵀ)ᵀ = M_ii⁻¹, a Cholesky-type square root of the inverse mass.
  H0.topLeftCorner(n_i, n_i) =
      L.triangularView<Eigen::Lower>().solve(Mat::Identity(n_i, n_i)).transpose();
  if (extra_identity) H0.bottomRightCorner(extra_identity, extra_identity).setIdentity();
  return H0;
}

namespace {

std::vector<Vec> sample_field(const Expr& e, const std::vector<Point2>& pts, double T,
                              int N_t) {
  std::vector<Vec> out(N_t + 1);
  for (int j = 0; j <= N_t; ++j) out[j] = eval_at_nodes(e, pts, T * j / N_t);
  return out;
}

}  // namespace

RiccatiProblem internal_riccati_problem_sampled(const FemOperators& ops,
                                                const std::vector<Vec>& a_bars,
                                                const std::vector<Vec>& b1_bars,
                                                const std::vector<Vec>& b2_bars,
                                                const InternalActuatorSet& set,
                                                double lambda, double nu, double T,
                                                bool use_mass_output) {
  int N_t = static_cast<int>(a_bars.size()) - 1;
  RiccatiProblem p;
  p.k = T / N_t;
  p.R = set.R_in;
  p.C = output_matrix(ops, nu, use_mass_output);
  Mat diff = diffusion_state_matrix(ops, nu);
  Eigen::LLT<Mat> M_llt(Mat(ops.M));
  p.X.resize(N_t + 1);
  for (int j = 0; j <= N_t; ++j)
    p.X[j] = diff - k_r_ii_cached(ops, M_llt, a_bars[j], b1_bars[j], b2_bars[j], lambda);
  return p;
}

RiccatiProblem boundary_riccati_problem_sampled(const FemOperators& ops,
                                                const std::vector<Vec>& a_bars,
                                                const std::vector<Vec>& b1_bars,
                                                const std::vector<Vec>& b2_bars,
                                                const BoundaryActuatorSet& set,
                                                double lambda, double nu, double T,
                                                bool use_mass_output) {
  int N_t = static_cast<int>(a_bars.size()) - 1;
  int n_i = ops.n_i, M = set.count();
  RiccatiProblem p;
  p.k = T / N_t;
  Mat C_in = output_matrix(ops, nu, use_mass_output);
  p.C = Mat::Zero(n_i + M, n_i + M);
  p.C.topLeftCorner(n_i, n_i) = C_in;
  p.C.bottomRightCorner(M, M).setIdentity();
  // State (v, κ) with v = z_i − Wκ, W the ς-harmonic lifting. The generator
  // is read off the coupled discrete dynamics: with E = W + M_ii⁻¹M_ib B_Ψ^Γ
  // and σ = ς − λ/2,
  //   v̇ = [−νM⁻¹S − M⁻¹L]v + [(2ς − λ/2)E − M⁻¹(L·W̃)]κ − E u,
  //   κ̇ = −σκ + u,
  // where L is the shifted reaction+convection operator and W̃ the full
  // extension column (interior lifting stacked over the boundary trace).
  const double sigma = set.varsigma - lambda / 2;
  Mat diff = diffusion_state_matrix(ops, nu);
  const Mat& E = set.B_psi_bar;
  Eigen::LLT<Mat> Mii_llt(Mat(ops.Mb.ii));
  p.X.resize(N_t + 1);
  for (int j = 0; j <= N_t; ++j) {
    Vec a_shift = a_bars[j].array() - lambda / 2;
    Mat L = Mat(reaction_matrix(ops, a_shift)) +
            Mat(convection_matrix(ops, b1_bars[j], b2_bars[j]));
    Mat X = Mat::Zero(n_i + M, n_i + M);
    X.topLeftCorner(n_i, n_i) = diff - Mii_llt.solve(L.topLeftCorner(n_i, n_i));
    X.topRightCorner(n_i, M) =
        (2.0 * set.varsigma - lambda / 2) * E -
        Mii_llt.solve(Mat((L * set.psi_extensions).topRows(n_i)));
    X.bottomRightCorner(M, M) = -sigma * Mat::Identity(M, M);
    p.X[j] = X;
  }
  p.R = Mat::Zero(n_i + M, M);
  p.R.topRows(n_i) = -E;
  p.R.bottomRows(M).setIdentity();
  return p;
}

RiccatiProblem internal_riccati_problem(const FemOperators& ops,
                                        const CoefficientField& coeff,
                                        const InternalActuatorSet& set, double lambda,
                                        double nu, double T, int N_t,
                                        bool use_mass_output) {
  return internal_riccati_problem_sampled(
      ops, sample_field(coeff.a, ops.points, T, N_t),
      sample_field(coeff.b1, ops.points, T, N_t),
      sample_field(coeff.b2, ops.points, T, N_t), set, lambda, nu, T, use_mass_output);
}

RiccatiProblem boundary_riccati_problem(const FemOperators& ops,
                                        const CoefficientField& coeff,
                                        const BoundaryActuatorSet& set, double lambda,
                                        double nu, double T, int N_t,
                                        bool use_mass_output) {
  return boundary_riccati_problem_sampled(
      ops, sample_field(coeff.a, ops.points, T, N_t),
      sample_field(coeff.b1, ops.points, T, N_t),
      sample_field(coeff.b2, ops.points, T, N_t), set, lambda, nu, T, use_mass_output);
}

Mat internal_feedback_matrix(const InternalActuatorSet& set, const Mat& Pi) {
  return set.R_in * (set.R_in.transpose() * Pi);
}

Mat boundary_feedback_matrix(const BoundaryActuatorSet& set, const Mat& Pi) {
  int n_i = static_cast<int>(set.B_psi_bar.rows());
  int M = set.count();
  // u-law RᵀΠ with R = [−E; I], then pull back to (z_i, κ) via v = z_i − Wκ.
  Mat RtPi = Pi.bottomRows(M) - set.B_psi_bar.transpose() * Pi.topRows(n_i);
  Mat T = Mat::Identity(n_i + M, n_i + M);
  T.topRightCorner(n_i, M) = -set.psi_extensions.topRows(n_i);
  return RtPi * T;
}

}  // namespace parastab
