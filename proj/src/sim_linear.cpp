#include "parastab/sim_linear.hpp"

#include <cmath>

namespace parastab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// L_λ = ½(M D_{a−λ/2} + D_{a−λ/2} M) + G1 D_b1 + G2 D_b2 at time t.
SpMat l_lambda(const FemOperators& ops, const CoefficientField& coeff, double lambda,
               double t) {
  Vec a = eval_at_nodes(coeff.a, ops.points, t);
  a.array() -= lambda / 2;
  Vec b1 = eval_at_nodes(coeff.b1, ops.points, t);
  Vec b2 = eval_at_nodes(coeff.b2, ops.points, t);
  return reaction_matrix(ops, a) + convection_matrix(ops, b1, b2);
}

// Returns true (and marks the trajectory) when the solution left the bounded
// regime; remaining norms are filled with +inf.
bool check_blow_up(Trajectory& traj, int j, double norm0) {
  double v = traj.norm_sq[j];
  if (std::isfinite(v) && v <= 1e10 * std::max(norm0, 1e-300)) return false;
  traj.blow_up = true;
  traj.blow_up_step = j;
  for (size_t i = j; i < traj.norm_sq.size(); ++i) traj.norm_sq[i] = kInf;
  return true;
}

Trajectory simulate_boundary_core(const FemOperators& ops,
                                  const CoefficientField& coeff,
                                  const BoundaryActuatorSet& set, double lambda,
                                  double nu, const Vec& z0, const Vec& kappa0,
                                  const RiccatiPath* path,
                                  const ControlSchedule* schedule,
                                  const Eigen::MatrixXd* prescribed, int N_t,
                                  double k) {
  int n_i = ops.n_i, n_b = ops.n_b, sp = ops.n_points();
  int M = set.count();
  if (z0.size() != sp) throw DimensionMismatch("simulate_boundary: z0 length mismatch");
  if (kappa0.size() != M)
    throw DimensionMismatch("simulate_boundary: kappa0 length mismatch");
  const Eigen::MatrixXd& Bg = set.psi_traces;
  if ((z0.tail(n_b) - Bg * kappa0).lpNorm<Eigen::Infinity>() >
      1e-9 * (1.0 + z0.lpNorm<Eigen::Infinity>()))
    throw CompatibilityViolation(
        "initial boundary trace does not match the actuator span coefficients");

  Trajectory traj;
  traj.N_t = N_t;
  traj.k = k;
  traj.T = k * N_t;
  traj.z = Eigen::MatrixXd::Zero(sp, N_t + 1);
  traj.kappa = Eigen::MatrixXd::Zero(M, N_t + 1);
  traj.control = traj.kappa;
  traj.norm_sq.assign(N_t + 1, 0.0);

  SpMat A_plus = SpMat(2.0 * ops.Mb.ii) + SpMat(k * nu * ops.Sb.ii);
  SpMat A_minus = SpMat(2.0 * ops.Mb.ii) - SpMat(k * nu * ops.Sb.ii);
  SpMat A_plus_ib = SpMat(2.0 * ops.Mb.ib) + SpMat(k * nu * ops.Sb.ib);
  SpMat A_minus_ib = SpMat(2.0 * ops.Mb.ib) - SpMat(k * nu * ops.Sb.ib);
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-12);
  cg.setMaxIterations(10 * n_i);
  cg.compute(A_plus);

  double sigma_l = set.varsigma - lambda / 2;
  Vec zi = z0.head(n_i);
  Vec zi_prev = zi;
  Vec kap = kappa0;
  traj.z.col(0) = z0;
  traj.kappa.col(0) = kap;
  traj.control.col(0) = kap;
  traj.norm_sq[0] = h_norm_sq(ops, z0);
  double norm0 = traj.norm_sq[0];

  SpMat Lcur = l_lambda(ops, coeff, lambda, 0.0);
  Vec Lz_prev;  // ghost: set to L⁰z⁰ below
  Vec fb_prev = Vec::Zero(M);
  for (int j = 0; j < N_t; ++j) {
    SpMat Lnext = l_lambda(ops, coeff, lambda, k * (j + 1));
    Vec Lz_cur = Lcur.block(0, 0, n_i, n_i) * zi;
    if (j == 0) Lz_prev = Lz_cur;

    Vec fb_cur = Vec::Zero(M);
    if (!prescribed && schedule->contains((j + 0.5) * k)) {
      Vec state(n_i + M);
      state << zi, kap;
      fb_cur = boundary_feedback_matrix(set, path->Pi[j]) * state;
    }
    if (j == 0) fb_prev = fb_cur;

    Vec kap_next =
        prescribed ? Vec(prescribed->col(j + 1))
                   : Vec(((2.0 - k * sigma_l) * kap - k * (3.0 * fb_cur - fb_prev)) /
                         (2.0 + k * sigma_l));
    Vec zb_next = Bg * kap_next;
    Vec zb_cur = Bg * kap;
    Vec rhs = A_minus * zi - A_plus_ib * zb_next -
              k * (Lnext.block(0, n_i, n_i, n_b) * zb_next) + A_minus_ib * zb_cur -
              k * (Lcur.block(0, n_i, n_i, n_b) * zb_cur) - 3.0 * k * Lz_cur +
              k * Lz_prev;
    Vec zi_next = cg.solve(rhs);
    if (cg.info() != Eigen::Success)
      throw SingularSystem("time step solve failed at step " + std::to_string(j));

    zi_prev = zi;
    zi = zi_next;
    kap = kap_next;
    Lz_prev = Lz_cur;
    fb_prev = fb_cur;
    Lcur = std::move(Lnext);
    traj.z.col(j + 1).head(n_i) = zi;
    traj.z.col(j + 1).tail(n_b) = zb_next;
    traj.kappa.col(j + 1) = kap;
    traj.control.col(j + 1) = kap;
    traj.norm_sq[j + 1] = h_norm_sq(ops, traj.z.col(j + 1));
    if (check_blow_up(traj, j + 1, norm0)) break;
  }
  return traj;
}

}  // namespace

Trajectory simulate_internal(const FemOperators& ops, const CoefficientField& coeff,
                             const InternalActuatorSet& set, const RiccatiPath& path,
                             double lambda, double nu, const Vec& z0,
                             const ControlSchedule& schedule) {
  int n_i = ops.n_i, n_b = ops.n_b, sp = ops.n_points();
  int N_t = static_cast<int>(path.Pi.size()) - 1;
  double k = path.k;
  if (z0.size() != sp) throw DimensionMismatch("simulate_internal: z0 length mismatch");
  if (z0.tail(n_b).lpNorm<Eigen::Infinity>() > 1e-12 * (1.0 + z0.lpNorm<Eigen::Infinity>()))
    throw CompatibilityViolation("internal runs need a zero boundary trace");

  int Mc = set.count();
  Trajectory traj;
  traj.N_t = N_t;
  traj.k = k;
  traj.T = k * N_t;
  traj.z = Eigen::MatrixXd::Zero(sp, N_t + 1);
  traj.control = Eigen::MatrixXd::Zero(Mc, N_t + 1);
  traj.control_raw = Eigen::MatrixXd::Zero(Mc, N_t + 1);
  traj.norm_sq.assign(N_t + 1, 0.0);

  SpMat A_plus = SpMat(2.0 * ops.Mb.ii) + SpMat(k * nu * ops.Sb.ii);
  SpMat A_minus = SpMat(2.0 * ops.Mb.ii) - SpMat(k * nu * ops.Sb.ii);
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-12);
  cg.setMaxIterations(10 * n_i);
  cg.compute(A_plus);

  auto record_control = [&](int j, const Vec& zi) {
    if (schedule.contains(j * k)) {
      Vec u = -(set.R_in.transpose() * (path.Pi[j] * zi));
      traj.control.col(j) = u;
      traj.control_raw.col(j) =
          set.unrestricted
              ? u
              : Vec(set.gs_factor.triangularView<Eigen::Upper>().solve(u));
    }
  };

  Vec zi = z0.head(n_i);
  Vec zi_prev = zi;
  traj.z.col(0) = z0;
  traj.norm_sq[0] = h_norm_sq(ops, z0);
  double norm0 = traj.norm_sq[0];
  record_control(0, zi);

  Vec Lz_prev, fb_prev;
  for (int j = 0; j < N_t; ++j) {
    SpMat L = l_lambda(ops, coeff, lambda, k * j);
    Vec Lz_cur = L.block(0, 0, n_i, n_i) * zi;
    Vec fb_cur = Vec::Zero(n_i);
    if (schedule.contains((j + 0.5) * k))
      fb_cur = set.R_in * (set.R_in.transpose() * (path.Pi[j] * zi));
    if (j == 0) {
      Lz_prev = Lz_cur;
      fb_prev = fb_cur;
    }
    Vec rhs = A_minus * zi - k * (3.0 * Lz_cur - Lz_prev) -
              k * (ops.Mb.ii * (3.0 * fb_cur - fb_prev));
    Vec zi_next = cg.solve(rhs);
    if (cg.info() != Eigen::Success)
      throw SingularSystem("time step solve failed at step " + std::to_string(j));
    zi_prev = zi;
    zi = zi_next;
    Lz_prev = Lz_cur;
    fb_prev = fb_cur;
    traj.z.col(j + 1).head(n_i) = zi;
    traj.norm_sq[j + 1] = h_norm_sq(ops, traj.z.col(j + 1));
    record_control(j + 1, zi);
    if (check_blow_up(traj, j + 1, norm0)) break;
  }
  return traj;
}

Trajectory simulate_boundary(const FemOperators& ops, const CoefficientField& coeff,
                             const BoundaryActuatorSet& set, const RiccatiPath& path,
                             double lambda, double nu, const Vec& z0, const Vec& kappa0,
                             const ControlSchedule& schedule) {
  int N_t = static_cast<int>(path.Pi.size()) - 1;
  return simulate_boundary_core(ops, coeff, set, lambda, nu, z0, kappa0, &path,
                                &schedule, nullptr, N_t, path.k);
}

Trajectory replay_open_loop(const FemOperators& ops, const CoefficientField& coeff,
                            const BoundaryActuatorSet& set,
                            const Eigen::MatrixXd& kappa_history, double lambda,
                            double nu, const Vec& z0, double T) {
  int N_t = static_cast<int>(kappa_history.cols()) - 1;
  if (N_t < 1) throw DimensionMismatch("replay_open_loop: kappa history too short");
  return simulate_boundary_core(ops, coeff, set, lambda, nu, z0,
                                Vec(kappa_history.col(0)), nullptr, nullptr,
                                &kappa_history, N_t, T / N_t);
}

}  // namespace parastab
