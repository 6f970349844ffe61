#pragma once

#include "parastab/sim_linear.hpp"

namespace parastab {

struct UnsupportedDerivative : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ∂ty − νΔy + c₃y³ + c₂y² + c₁y + ½∇·(y², y²) = −f0, y|Γ = g, with f0 and g
// manufactured from the reference trajectory ŷ.
struct NonlinearProblem {
  double nu = 0;
  double c1 = 0, c2 = 0, c3 = 0;
  Expr yhat;
  Expr f0;
  Expr g;
};

NonlinearProblem make_nonlinear_problem(const Expr& yhat, double nu, double c1,
                                        double c2, double c3);

// f0 = −(∂tŷ − νΔŷ + c₃ŷ³ + c₂ŷ² + c₁ŷ + ½∇·(ŷ², ŷ²)); g = ŷ.
std::pair<Expr, Expr> manufactured_forcing(const Expr& yhat, double nu, double c1,
                                           double c2, double c3);

// N_{1,D}(ȳ) = M(c₃ȳ³ + c₂ȳ² + c₁ȳ) + ½(G1 ȳ² + G2 ȳ²), powers coordinate-wise.
Vec nonlinear_term(const FemOperators& ops, const Vec& y_bar, double c1, double c2,
                   double c3);

// Linearization coefficients along ŷ: â = c₁ + 2c₂ŷ + 3c₃ŷ², b̂ = (ŷ, ŷ).
CoefficientField linearized_coefficients(const NonlinearProblem& problem);

enum class Scheme { Extrapolation, Heun, Newton };

struct NonlinearOptions {
  Scheme scheme = Scheme::Extrapolation;
  double newton_tol = 1e-12;
  int newton_cap = 50;
  bool diagonal_jacobian = false;  // diagonal-only convection part
};

struct InternalFeedback {
  const InternalActuatorSet* set = nullptr;
  const RiccatiPath* path = nullptr;
};

struct BoundaryFeedback {
  const BoundaryActuatorSet* set = nullptr;
  const RiccatiPath* path = nullptr;
  Vec kappa0;
};

// Simulates y itself (not a deviation); with feedback, the control acts on
// y − ŷ. Exactly one of ifb/bfb may be non-null.
Trajectory simulate_nonlinear(const FemOperators& ops, const NonlinearProblem& problem,
                              double T, int N_t, const Vec& y0,
                              const NonlinearOptions& options = {},
                              const InternalFeedback* ifb = nullptr,
                              const BoundaryFeedback* bfb = nullptr);

}  // namespace parastab
