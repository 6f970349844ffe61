#pragma once

#include <stdexcept>
#include <vector>

#include "parastab/riccati.hpp"
#include "parastab/sim_linear.hpp"

namespace parastab {

struct DecayMetrics {
  double weighted_sup = 0;   // sup_j e^{λ t_j} |y(t_j)|²_H / |y(0)|²_H
  double final_ratio = 0;    // e^{λ T} |y(T)|²_H / |y(0)|²_H
  bool stabilized = false;
};

// norms_sq holds |y(t_j)|²_H of the unshifted solution at the node times.
DecayMetrics decay_metrics(const std::vector<double>& norms_sq, double lambda,
                           double k, double ceiling = 1e4);

// Convenience overload: trajectory norms are those of the λ-shifted variable,
// so the weighted values reduce to traj.norm_sq[j] / traj.norm_sq[0].
DecayMetrics decay_metrics(const Trajectory& traj, double lambda,
                           double ceilng = 1e4);

// Smallest m ≥ 0 with λ t_j + log(|y(t_j)|²/|y(0)|²) ≤ λ t_i + log(...) + m
// for all i ≤ j; computed as max_j (r_j − min_{i≤j} r_i).
double m_lambda(const std::vector<double>& norms_sq, double lambda, double k);

// Quadratic value z̄ᵀ Π^j z̄ along a trajectory; z̄ is the interior state for
// internal control and [interior state; κ] for boundary control.
std::vector<double> cost_series(const RiccatiPath& path, const Trajectory& traj);

// ratios[i] = errors[i] / errors[i+1]
std::vector<double> convergence_ratios(const std::vector<double>& errors);

}  // namespace parastab
