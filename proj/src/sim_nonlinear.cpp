#include "parastab/sim_nonlinear.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <limits>

namespace parastab {

std::pair<Expr, Expr> manufactured_forcing(const Expr& yhat, double nu, double c1,
                                           double c2, double c3) {
  try {
    Expr dt = differentiate(yhat, Var::T);
    Expr dx1 = differentiate(yhat, Var::X1);
    Expr dx2 = differentiate(yhat, Var::X2);
    Expr lap = differentiate(dx1, Var::X1) + differentiate(dx2, Var::X2);
    // ½∇·(ŷ², ŷ²) = ŷ(∂₁ŷ + ∂₂ŷ)
    Expr f0 = -(dt - constant(nu) * lap + constant(c3) * pow(yhat, 3) +
                constant(c2) * pow(yhat, 2) + constant(c1) * yhat +
                yhat * (dx1 + dx2));
    return {f0, yhat};
  } catch (const NonDifferentiable& e) {
    throw UnsupportedDerivative(e.what());
  }
}

NonlinearProblem make_nonlinear_problem(const Expr& yhat, double nu, double c1,
                                        double c2, double c3) {
  NonlinearProblem p;
  p.nu = nu;
  p.c1 = c1;
  p.c2 = c2;
  p.c3 = c3;
  p.yhat = yhat;
  std::tie(p.f0, p.g) = manufactured_forcing(yhat, nu, c1, c2, c3);
  return p;
}

Vec nonlinear_term(const FemOperators& ops, const Vec& y_bar, double c1, double c2,
                   double c3) {
  if (y_bar.size() != ops.n_points())
    throw DimensionMismatch("nonlinear_term: nodal vector length mismatch");
  Vec y2 = y_bar.array().square().matrix();
  Vec poly =
      (c3 * y_bar.array().cube() + c2 * y2.array() + c1 * y_bar.array()).matrix();
  return ops.M * poly + 0.5 * (ops.G1 * y2 + ops.G2 * y2);
}

CoefficientField linearized_coefficients(const NonlinearProblem& problem) {
  CoefficientField f;
  f.a = constant(problem.c1) + constant(2 * problem.c2) * problem.yhat +
        constant(3 * problem.c3) * pow(problem.yhat, 2);
  f.b1 = problem.yhat;
  f.b2 = problem.yhat;
  return f;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct StepWorkspace {
  const FemOperators& ops;
  const NonlinearProblem& pb;
  double k;
  SpMat A_plus, A_minus, A_plus_ib, A_minus_ib, M_ii_euler, M_ib_euler;
  SpMat G1_ii, G2_ii, M_ii_blk;
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg_A, cg_M;

  StepWorkspace(const FemOperators& o, const NonlinearProblem& p, double k_)
      : ops(o), pb(p), k(k_) {
    A_plus = SpMat(2.0 * o.Mb.ii) + SpMat(k * p.nu * o.Sb.ii);
    A_minus = SpMat(2.0 * o.Mb.ii) - SpMat(k * p.nu * o.Sb.ii);
    A_plus_ib = SpMat(2.0 * o.Mb.ib) + SpMat(k * p.nu * o.Sb.ib);
    A_minus_ib = SpMat(2.0 * o.Mb.ib) - SpMat(k * p.nu * o.Sb.ib);
    M_ii_euler = SpMat(o.Mb.ii) - SpMat(k * p.nu * o.Sb.ii);
    M_ib_euler = SpMat(o.Mb.ib) - SpMat(k * p.nu * o.Sb.ib);
    G1_ii = o.G1b.ii;
    G2_ii = o.G2b.ii;
    M_ii_blk = o.Mb.ii;
    cg_A.setTolerance(1e-12);
    cg_A.setMaxIterations(10 * o.n_i);
    cg_A.compute(A_plus);
    cg_M.setTolerance(1e-12);
    cg_M.setMaxIterations(10 * o.n_i);
    cg_M.compute(M_ii_blk);
  }

  Vec full(const Vec& w, const Vec& gb) const {
    Vec y(ops.n_points());
    y << w, gb;
    return y;
  }

  Vec n_interior(const Vec& y_full) const {
    return nonlinear_term(ops, y_full, pb.c1, pb.c2, pb.c3).head(ops.n_i);
  }

  // Explicit Euler guess for y_i^{j+1} from the state at t_j.
  Vec euler_guess(const Vec& yi, const Vec& gb_j, const Vec& gb_next, const Vec& Mf0_j,
                  const Vec& N_j) const {
    Vec rhs = M_ii_euler * yi + M_ib_euler * gb_j - ops.Mb.ib * gb_next - k * Mf0_j -
              k * N_j;
    Vec w = cg_M.solve(rhs);
    if (cg_M.info() != Eigen::Success)
      throw SingularSystem("Euler guess mass solve failed");
    return w;
  }
};

}  // namespace

Trajectory simulate_nonlinear(const FemOperators& ops, const NonlinearProblem& problem,
                              double T, int N_t, const Vec& y0,
                              const NonlinearOptions& options,
                              const InternalFeedback* ifb, const BoundaryFeedback* bfb) {
  int n_i = ops.n_i, n_b = ops.n_b, sp = ops.n_points();
  if (y0.size() != sp) throw DimensionMismatch("simulate_nonlinear: y0 length mismatch");
  if (ifb && bfb) throw std::invalid_argument("at most one feedback kind");
  double k = T / N_t;
  StepWorkspace ws(ops, problem, k);

  int Mc = ifb ? ifb->set->count() : (bfb ? bfb->set->count() : 0);
  Trajectory traj;
  traj.N_t = N_t;
  traj.k = k;
  traj.T = T;
  traj.z = Eigen::MatrixXd::Zero(sp, N_t + 1);
  traj.norm_sq.assign(N_t + 1, 0.0);
  traj.control = Eigen::MatrixXd::Zero(Mc, N_t + 1);
  if (bfb) traj.kappa = Eigen::MatrixXd::Zero(Mc, N_t + 1);
  if (options.scheme == Scheme::Newton) traj.newton_iters.assign(N_t, 0);

  std::vector<Point2> bd_points(ops.points.begin() + n_i, ops.points.end());
  auto g_at = [&](double t) { return eval_at_nodes(problem.g, bd_points, t); };
  auto yhat_at = [&](double t) { return eval_at_nodes(problem.yhat, ops.points, t); };
  auto Mf0_at = [&](double t) {
    return Vec((ops.M * eval_at_nodes(problem.f0, ops.points, t)).head(n_i));
  };

  Vec kap = bfb ? bfb->kappa0 : Vec();
  if (bfb) {
    Vec expected = g_at(0.0) + bfb->set->psi_traces * kap;
    if ((y0.tail(n_b) - expected).lpNorm<Eigen::Infinity>() >
        1e-9 * (1.0 + y0.lpNorm<Eigen::Infinity>()))
      throw CompatibilityViolation(
          "y0 boundary trace must equal g(0) plus the actuator combination");
    traj.kappa.col(0) = kap;
    traj.control.col(0) = kap;
  }

  Vec yi = y0.head(n_i);
  Vec yi_prev = yi;
  traj.z.col(0) = y0;
  traj.norm_sq[0] = h_norm_sq(ops, y0);
  double norm0 = traj.norm_sq[0];
  if (ifb) traj.control.col(0) =
      -(ifb->set->R_in.transpose() * (ifb->path->Pi[0] * (yi - yhat_at(0.0).head(n_i))));

  // Step-to-step history for the extrapolated terms.
  Vec gb_cur = g_at(0.0);
  if (bfb) gb_cur += bfb->set->psi_traces * kap;
  Vec Mf0_cur = Mf0_at(0.0);
  Vec N_cur = ws.n_interior(ws.full(yi, gb_cur));
  Vec N_prev, fb_prev;

  for (int j = 0; j < N_t; ++j) {
    double t = j * k, t1 = (j + 1) * k;
    if (j == 0) N_prev = N_cur;

    // Feedback contributions (explicit, linearly extrapolated).
    Vec fb_cur;
    Vec kap_next;
    if (ifb) {
      fb_cur = ifb->set->R_in *
               (ifb->set->R_in.transpose() *
                (ifb->path->Pi[j] * (yi - yhat_at(t).head(n_i))));
    } else if (bfb) {
      Vec state(n_i + Mc);
      state << yi - yhat_at(t).head(n_i), kap;
      fb_cur = boundary_feedback_matrix(*bfb->set, bfb->path->Pi[j]) * state;
    }
    if ((ifb || bfb) && j == 0) fb_prev = fb_cur;
    if (bfb)
      kap_next = ((2.0 - k * bfb->set->varsigma) * kap -
                  k * (3.0 * fb_cur - fb_prev)) /
                 (2.0 + k * bfb->set->varsigma);

    Vec gb_next = g_at(t1);
    if (bfb) gb_next += bfb->set->psi_traces * kap_next;
    Vec Mf0_next = Mf0_at(t1);

    Vec H = ws.A_minus * yi - ws.A_plus_ib * gb_next + ws.A_minus_ib * gb_cur -
            k * (Mf0_next + Mf0_cur) - k * N_cur;
    if (ifb) H -= k * (ops.Mb.ii * (3.0 * fb_cur - fb_prev));

    Vec yi_next;
    if (options.scheme == Scheme::Extrapolation) {
      // A⊕y^{j+1} = H − k(2N^j − N^{j−1})  (H already carries one −kN^j)
      Vec rhs = H - k * (2.0 * N_cur - N_prev);
      yi_next = ws.cg_A.solve(rhs);
      if (ws.cg_A.info() != Eigen::Success)
        throw SingularSystem("time step solve failed at step " + std::to_string(j));
    } else if (options.scheme == Scheme::Heun) {
      Vec guess = ws.euler_guess(yi, gb_cur, gb_next, Mf0_cur, N_cur);
      Vec N_guess = ws.n_interior(ws.full(guess, gb_cur));
      Vec rhs = H - k * N_guess;
      yi_next = ws.cg_A.solve(rhs);
      if (ws.cg_A.info() != Eigen::Success)
        throw SingularSystem("time step solve failed at step " + std::to_string(j));
    } else {
      Vec w = ws.euler_guess(yi, gb_cur, gb_next, Mf0_cur, N_cur);
      auto F = [&](const Vec& v) {
        return Vec(-(ws.A_plus * v) - k * ws.n_interior(ws.full(v, gb_next)) + H);
      };
      int it = 0;
      bool converged = false;
      Vec Fw = F(w);
      while (it < options.newton_cap) {
        ++it;
        Vec poly = (3 * problem.c3 * w.array().square() +
                    2 * problem.c2 * w.array() + problem.c1)
                       .matrix();
        SpMat J = ws.A_plus;
        SpMat Dp(n_i, n_i), Dw(n_i, n_i);
        Dp = poly.asDiagonal();
        if (options.diagonal_jacobian) {
          Vec conv =
              (ops.G1 * ws.full(w, gb_next) + ops.G2 * ws.full(w, gb_next)).head(n_i);
          SpMat Dc(n_i, n_i);
          Dc = conv.asDiagonal();
          J += SpMat(k * (ws.M_ii_blk * Dp)) + SpMat(k * Dc);
        } else {
          Dw = w.asDiagonal();
          J += SpMat(k * (ws.M_ii_blk * Dp)) + SpMat(k * (ws.G1_ii * Dw)) +
               SpMat(k * (ws.G2_ii * Dw));
        }
        Vec delta = solve_lu(J, Fw);  // w_{n+1} = w − dF⁻¹F = w + J⁻¹F
        Vec w_next = w + delta;
        Vec Fw_next = F(w_next);
        double dw = delta.lpNorm<Eigen::Infinity>();
        double wn = w.lpNorm<Eigen::Infinity>();
        // Accept when the update is small in both absolute and relative terms
        // and the residual meets the tolerance, so every accepted step
        // satisfies ‖F(w*)‖_∞ ≤ tol.  The stagnation escape covers updates at
        // the floating-point fixed point, where no further progress is
        // possible.
        const bool converged_all =
            dw < options.newton_tol &&
            (wn == 0 || dw / wn < options.newton_tol) &&
            Fw_next.lpNorm<Eigen::Infinity>() < options.newton_tol;
        const bool stagnated =
            dw == 0.0 ||
            (wn > 0 &&
             dw / wn < 4.0 * std::numeric_limits<double>::epsilon());
        if (converged_all || stagnated) {
          w = w_next;
          converged = true;
          break;
        }
        w = w_next;
        Fw = Fw_next;
      }
      if (!converged)
        traj.warnings.push_back("Newton hit the iteration cap at step " +
                                std::to_string(j));
      traj.newton_iters[j] = it;
      yi_next = w;
    }

    yi_prev = yi;
    yi = yi_next;
    N_prev = N_cur;
    gb_cur = gb_next;
    Mf0_cur = Mf0_next;
    if (ifb || bfb) fb_prev = fb_cur;
    if (bfb) {
      kap = kap_next;
      traj.kappa.col(j + 1) = kap;
      traj.control.col(j + 1) = kap;
    }
    N_cur = ws.n_interior(ws.full(yi, gb_cur));
    traj.z.col(j + 1).head(n_i) = yi;
    traj.z.col(j + 1).tail(n_b) = gb_cur;
    traj.norm_sq[j + 1] = h_norm_sq(ops, traj.z.col(j + 1));
    if (ifb)
      traj.control.col(j + 1) =
          -(ifb->set->R_in.transpose() *
            (ifb->path->Pi[j + 1] * (yi - yhat_at(t1).head(n_i))));
    double v = traj.norm_sq[j + 1];
    if (!std::isfinite(v) || v > 1e10 * std::max(norm0, 1.0)) {
      traj.blow_up = true;
      traj.blow_up_step = j + 1;
      for (int i = j + 1; i <= N_t; ++i) traj.norm_sq[i] = kInf;
      break;
    }
  }
  return traj;
}

}  // namespace parastab
