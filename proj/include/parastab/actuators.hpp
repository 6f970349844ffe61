#pragma once

#include "parastab/fem.hpp"

namespace parastab {

struct EmptyCell : std::runtime_error {
  int index;
  explicit EmptyCell(int idx)
      : std::runtime_error("actuator cell " + std::to_string(idx) +
                           " contains no interior node"),
        index(idx) {}
};

struct RankDeficient : std::runtime_error {
  int index;
  explicit RankDeficient(int idx)
      : std::runtime_error("vector " + std::to_string(idx) +
                           " is linearly dependent on its predecessors"),
        index(idx) {}
};

struct Rect {
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
};

// Piecewise-constant actuators on an m×n cell partition of a rectangle ω.
// All nodal data lives on interior nodes in the interior-first numbering.
struct InternalActuatorSet {
  Rect omega;
  int m = 0, n = 0;
  bool unrestricted = false;           // R_in = diag(χ1_ω) instead of D·S_M
  Eigen::MatrixXd indicators;          // n_i × M raw 0/1 cell indicators
  Vec chi_mask;                        // n_i, χ·1_ω
  Eigen::MatrixXd S_M;                 // n_i × M, M_ii-orthonormal columns
  Eigen::MatrixXd gs_factor;           // M×M upper triangular, indicators = S_M·gs_factor
  Eigen::MatrixXd R_in;

  int count() const { return static_cast<int>(R_in.cols()); }
};

// Boundary sinusoids Ψ_i(θ) = 1_{(θ0,θ1)} sin(i(θ−θ0)/(θ1−θ0)) with
// ς-harmonic extensions into the domain.
struct BoundaryActuatorSet {
  double theta0 = 0, theta1 = 0;
  double varsigma = 0, nu = 0;
  bool scaled_pi = false;              // use sin(iπ·ratio), vanishing at θ1
  Eigen::MatrixXd psi_traces;          // n_b × M  (B_Ψ^Γ)
  Eigen::MatrixXd psi_extensions;      // s_p × M, boundary rows = traces
  Eigen::MatrixXd B_psi_bar;           // n_i × M
  Eigen::MatrixXd R_bo;                // (n_i+M) × M = [B̄_Ψ; I_M]

  int count() const { return static_cast<int>(psi_traces.cols()); }
};

// M_ii-weighted Gram–Schmidt. Returns the orthonormal columns Q and the upper
// triangular factor F with input = Q·F (for change-of-basis reporting).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gram_schmidt_m(
    const Eigen::MatrixXd& vectors, const SpMat& M_ii);

// chi: full nodal mask of length s_p, or empty for the default χ = 1_ω.
InternalActuatorSet build_internal_actuators(const FemOperators& ops, Rect omega,
                                             int m, int n, const Vec& chi = Vec(),
                                             bool unrestricted = false);

BoundaryActuatorSet build_boundary_actuators(const FemOperators& ops, double theta0,
                                             double theta1, int M, double varsigma,
                                             double nu, bool scaled_pi = false);

}  // namespace parastab
