#pragma once

#include <stdexcept>

namespace parastab {

// Inputs of the stabilizability constants. The domain-dependent existence
// constants (D_rc, D_hat, iota) are not computable from first principles here;
// they default to 1 so the calculator exposes the scaling laws.
struct TheoryParams {
  int d = 2;              // spatial dimension
  double r = 1;           // time-window length for theta()
  double n_a = 0;         // reaction-coefficient norm proxy
  double n_b = 0;         // convection-coefficient norm proxy
  double n_W = 0;         // combined norm
  double D_rc = 1;
  double D_hat = 1;
  double iota = 1;        // embedding norm
  double chi_norm = 1;    // C¹ norm of the cutoff
  double domain_volume = 0;  // |Ω|
  double w_R_volume = 0;     // |w_R| reference cell volume
  double l_bar = 0;          // max partition cell side
};

// Θ(r,θ₁,θ₂,d) = 1 + θ₁² + dθ₂² + 1/r + r(θ₁ + dθ₂²); always ≥ 1.
double theta(double r, double th1, double th2, int d);

struct TStarUpsilon {
  double T_star = 0;  // +inf when all coefficient norms vanish
  double upsilon = 0;
};

TStarUpsilon t_star_upsilon(const TheoryParams& params);

double ball_volume(int d);  // |B_d| = π^{d/2} / Γ(d/2 + 1)

struct ActuatorBounds {
  double D_d = 0;
  double ball_vol = 0;
  double M_eig_raw = 0, M_pc_raw = 0, M_simple_raw = 0;
  long M_eig = 0, M_pc = 0, M_simple = 0;  // ceilings
  double T_star_part = 0;
};

ActuatorBounds actuator_bounds(const TheoryParams& params);

}  // namespace parastab
