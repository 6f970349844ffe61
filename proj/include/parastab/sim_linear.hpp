#pragma once

#include <limits>

#include "parastab/actuators.hpp"
#include "parastab/fem.hpp"
#include "parastab/riccati.hpp"

namespace parastab {

struct CompatibilityViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Time windows on which the feedback is active. A step contributes its
// feedback term iff the step midpoint (j+1/2)k lies in some window.
struct ControlSchedule {
  std::vector<std::pair<double, double>> on_intervals;  // disjoint, sorted, [a, b)

  bool contains(double t) const {
    for (const auto& [a, b] : on_intervals)
      if (a <= t && t < b) return true;
    return false;
  }
  static ControlSchedule always() { return {{{0.0, std::numeric_limits<double>::infinity()}}}; }
  static ControlSchedule never() { return {}; }
};

struct Trajectory {
  double T = 0;
  int N_t = 0;
  double k = 0;
  Eigen::MatrixXd z;            // s_p × (N_t+1) nodal values (simulated variable)
  Eigen::MatrixXd kappa;        // M × (N_t+1) on boundary runs, empty otherwise
  std::vector<double> norm_sq;  // |z^j|²_H per step (+inf past a blow-up)
  Eigen::MatrixXd control;      // per-step actuator coefficients
  Eigen::MatrixXd control_raw;  // internal runs: coefficients in the raw cell basis
  std::vector<int> newton_iters;
  bool blow_up = false;
  int blow_up_step = -1;
  std::vector<std::string> warnings;

  double time_at(int j) const { return k * j; }
};

Trajectory simulate_internal(const FemOperators& ops, const CoefficientField& coeff,
                             const InternalActuatorSet& set, const RiccatiPath& path,
                             double lambda, double nu, const Vec& z0,
                             const ControlSchedule& schedule = ControlSchedule::always());

Trajectory simulate_boundary(const FemOperators& ops, const CoefficientField& coeff,
                             const BoundaryActuatorSet& set, const RiccatiPath& path,
                             double lambda, double nu, const Vec& z0, const Vec& kappa0,
                             const ControlSchedule& schedule = ControlSchedule::always());

// Integrates the boundary scheme with a prescribed κ history instead of the
// feedback law; shares the z-update code path with simulate_boundary so a
// verbatim replay reproduces the closed-loop trajectory bit-for-bit.
Trajectory replay_open_loop(const FemOperators& ops, const CoefficientField& coeff,
                            const BoundaryActuatorSet& set,
                            const Eigen::MatrixXd& kappa_history, double lambda,
                            double nu, const Vec& z0, double T);

}  // namespace parastab
