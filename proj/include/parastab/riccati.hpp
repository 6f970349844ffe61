#pragma once

#include "parastab/actuators.hpp"
#include "parastab/fem.hpp"

namespace parastab {

using Mat = Eigen::MatrixXd;

struct SingularLyapunov : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoStabilizingSeed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MaxIterations : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LossOfPositivity : std::runtime_error {
  int step;
  explicit LossOfPositivity(int j)
      : std::runtime_error("Riccati path loses positivity at step " + std::to_string(j)),
        step(j) {}
};

// Data of ∂tΠ + ΠX + XᵀΠ − ΠRRᵀΠ + CᵀC = 0 on a regular grid of N_t steps:
// X[j] is the state matrix at t_j = j·k.
struct RiccatiProblem {
  std::vector<Mat> X;
  Mat R;
  Mat C;
  double k = 0;

  int steps() const { return static_cast<int>(X.size()) - 1; }
};

struct RiccatiPath {
  std::vector<Mat> Pi;                 // N_t+1 entries, Pi[j] at t_j
  std::vector<int> newton_iters;      // per solved step j = 0..N_t-1
  std::vector<double> residuals;
  double k = 0;

  // Constant path (stationary problems solved by a single ARE).
  static RiccatiPath constant(const Mat& Pi, int N_t, double k_) {
    RiccatiPath p;
    p.Pi.assign(N_t + 1, Pi);
    p.k = k_;
    return p;
  }
};

// AᵀP + PA + Q = 0 for symmetric Q, via complex Schur reduction.
Mat solve_lyapunov(const Mat& A, const Mat& Q);

// ΠX + XᵀΠ − ΠRRᵀΠ + Q = 0 by Newton–Kleinman. Without a seed, starts from 0
// when X is already stable, otherwise from a Lyapunov-shift (Bass) seed.
Mat solve_are(const Mat& X, const Mat& R, const Mat& Q, const Mat* seed = nullptr,
              int* iters_out = nullptr, double* residual_out = nullptr);

// ARE chain over H_τ = (1−τ)H₀ + τ[R 0] weighted quadratically, each solve
// seeded by the previous; returns the τ=1 solution. N_h doubles on failure,
// up to 64.
Mat homotopy_init(const Mat& X_T, const Mat& R_target, const Mat& C, const Mat& H0,
                  int N_h = 8);

// Backward Crank–Nicolson sweep from Pi_T at t = T, one ARE per step.
RiccatiPath solve_dre_backward(const RiccatiProblem& problem, const Mat& Pi_T);

// Interior-interior block of K_r = M⁻¹(G1 D_b1 + G2 D_b2) + D_{a−r/2}.
Mat k_r_ii(const FemOperators& ops, const Vec& a_bar, const Vec& b1_bar,
           const Vec& b2_bar, double r);

// Dense −νM_ii⁻¹S_ii, shared by both problem builders.
Mat diffusion_state_matrix(const FemOperators& ops, double nu);

// Upper-triangular C with CᵀC = ν·S_ii (or CᵀC = M_ii when use_mass_output).
Mat output_matrix(const FemOperators& ops, double nu, bool use_mass_output = false);

// H₀ for the homotopy: a square root of M_ii⁻¹ (boundary variant appends I_M).
Mat homotopy_h0(const FemOperators& ops, int extra_identity = 0);

RiccatiProblem internal_riccati_problem(const FemOperators& ops,
                                        const CoefficientField& coeff,
                                        const InternalActuatorSet& set, double lambda,
                                        double nu, double T, int N_t,
                                        bool use_mass_output = false);

RiccatiProblem boundary_riccati_problem(const FemOperators& ops,
                                        const CoefficientField& coeff,
                                        const BoundaryActuatorSet& set, double lambda,
                                        double nu, double T, int N_t,
                                        bool use_mass_output = false);

// Same builders with precomputed nodal coefficient samples (a, b1, b2 at each
// of the N_t+1 grid times), for nonlinear runs where the linearization is
// evaluated along a reference trajectory.
RiccatiProblem internal_riccati_problem_sampled(const FemOperators& ops,
                                                const std::vector<Vec>& a_bars,
                                                const std::vector<Vec>& b1_bars,
                                                const std::vector<Vec>& b2_bars,
                                                const InternalActuatorSet& set,
                                                double lambda, double nu, double T,
                                                bool use_mass_output = false);

RiccatiProblem boundary_riccati_problem_sampled(const FemOperators& ops,
                                                const std::vector<Vec>& a_bars,
                                                const std::vector<Vec>& b1_bars,
                                                const std::vector<Vec>& b2_bars,
                                                const BoundaryActuatorSet& set,
                                                double lambda, double nu, double T,
                                                bool use_mass_output = false);

// F̄^in = R_in R_inᵀ Π.
Mat internal_feedback_matrix(const InternalActuatorSet& set, const Mat& Pi);

// F̄^bo_b = [0 I]·R_bo R_boᵀ Π·[I −B̄_Ψ; 0 I], the κ-equation feedback rows.
Mat boundary_feedback_matrix(const BoundaryActuatorSet& set, const Mat& Pi);

}  // namespace parastab
