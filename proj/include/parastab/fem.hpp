#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <stdexcept>
#include <vector>

#include "parastab/expr.hpp"
#include "parastab/mesh.hpp"

namespace parastab {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The four blocks of a matrix under the interior-first node numbering.
struct Blocks {
  SpMat ii, ib, bi, bb;
};

// P1 operators assembled in the interior-first numbering: node 0..n_i-1 are
// interior, n_i..s_p-1 boundary. `points`/`theta` follow the same numbering.
struct FemOperators {
  int n_i = 0, n_b = 0;
  std::vector<Point2> points;
  std::vector<double> theta;  // valid on the trailing n_b boundary nodes
  SpMat M, S, G1, G2;
  Blocks Mb, Sb, G1b, G2b;

  int n_points() const { return n_i + n_b; }
};

FemOperators assemble(const Mesh& mesh);

// Time-dependent scalar coefficients a, b1, b2 sampled at mesh nodes.
struct CoefficientField {
  Expr a, b1, b2;
};

Vec eval_at_nodes(const Expr& e, const std::vector<Point2>& points, double t);

// ½(M·diag(a)+diag(a)·M), the symmetrized reaction operator.
SpMat reaction_matrix(const FemOperators& ops, const Vec& a_bar);

// G1·diag(b1)+G2·diag(b2), the discrete ∇·(b ·) operator.
SpMat convection_matrix(const FemOperators& ops, const Vec& b1_bar, const Vec& b2_bar);

// Solves  mu·(-Δv) + beta_r v + ∇·(beta_c v) + h = 0  with Dirichlet data g_b
// (length n_b, interior-first numbering). Returns the full nodal vector.
Vec solve_elliptic(const FemOperators& ops, double mu, const Vec& beta_r,
                   const Vec& beta_c1, const Vec& beta_c2, const Vec& h,
                   const Vec& g_b);

// Squared H-norm v̄ᵀMv̄ of a full nodal vector.
double h_norm_sq(const FemOperators& ops, const Vec& v);

// Squared space-time norm sᵀM_t s for a sequence of (unsquared) H-norms at the
// N_t+1 grid times of a regular mesh with step k.
double bochner_norm_sq(const std::vector<double>& h_norms, double k);

// Sparse SPD solve via conjugate gradient (relative residual 1e-12).
Vec solve_spd(const SpMat& A, const Vec& rhs);

// Sparse direct LU solve for general systems.
Vec solve_lu(const SpMat& A, const Vec& rhs);

// `i j value` lines, 1-based, for debugging dumps.
std::string export_triplets(const SpMat& A);

}  // namespace parastab
