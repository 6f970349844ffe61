#include "parastab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace parastab {

DecayMetrics decay_metrics(const std::vector<double>& norms_sq, double lambda,
                           double k, double ceiling) {
  if (norms_sq.size() < 2)
    throw std::invalid_argument("decay_metrics: need at least two samples");
  if (norms_sq.front() <= 0)
    throw std::invalid_argument("decay_metrics: initial norm must be positive");
  DecayMetrics out;
  out.weighted_sup = 0;
  const double n0 = norms_sq.front();
  for (std::size_t j = 0; j < norms_sq.size(); ++j) {
    const double w = std::exp(lambda * k * static_cast<double>(j)) * norms_sq[j] / n0;
    if (!std::isfinite(w)) {
      out.weighted_sup = std::numeric_limits<double>::infinity();
      out.final_ratio = std::numeric_limits<double>::infinity();
      out.stabilized = false;
      return out;
    }
    out.weighted_sup = std::max(out.weighted_sup, w);
    if (j + 1 == norms_sq.size()) out.final_ratio = w;
  }
  out.stabilized = out.weighted_sup <= ceiling;
  return out;
}

DecayMetrics decay_metrics(const Trajectory& traj, double lambda, double ceiling) {
  // traj.norm_sq are norms of the shifted variable e^{λt/2} y, so undo the
  // weight first; decay_metrics then reapplies it exactly.
  std::vector<double> orig(traj.norm_sq.size());
  for (std::size_t j = 0; j < orig.size(); ++j)
    orig[j] = std::exp(-lambda * traj.k * static_cast<double>(j)) * traj.norm_sq[j];
  return decay_metrics(orig, lambda, traj.k, ceiling);
}

double m_lambda(const std::vector<double>& norms_sq, double lambda, double k) {
  if (norms_sq.size() < 2)
    throw std::invalid_argument("m_lambda: need at least two samples");
  for (double v : norms_sq)
    if (!(v > 0) || !std::isfinite(v))
      throw std::invalid_argument("m_lambda: norms must be positive and finite");
  const double n0 = norms_sq.front();
  double min_prefix = std::numeric_limits<double>::infinity();
  double m = 0;
  for (std::size_t j = 0; j < norms_sq.size(); ++j) {
    const double r = lambda * k * static_cast<double>(j) + std::log(norms_sq[j] / n0);
    min_prefix = std::min(min_prefix, r);
    m = std::max(m, r - min_prefix);
  }
  return m;
}

std::vector<double> cost_series(const RiccatiPath& path, const Trajectory& traj) {
  const int n_state = static_cast<int>(path.Pi.front().rows());
  const int n_kappa = static_cast<int>(traj.kappa.rows());
  const int n_i = n_state - n_kappa;
  if (n_i < 0 || n_i > traj.z.rows())
    throw std::invalid_argument("cost_series: state dimensions do not match");
  if (static_cast<int>(path.Pi.size()) != traj.N_t + 1)
    throw std::invalid_argument("cost_series: kernel path and trajectory lengths differ");
  std::vector<double> out(path.Pi.size());
  Vec x(n_state);
  for (std::size_t j = 0; j < path.Pi.size(); ++j) {
    x.head(n_i) = traj.z.col(static_cast<int>(j)).head(n_i);
    if (n_kappa > 0) x.tail(n_kappa) = traj.kappa.col(static_cast<int>(j));
    out[j] = x.dot(path.Pi[j] * x);
  }
  return out;
}

std::vector<double> convergence_ratios(const std::vector<double>& errors) {
  if (errors.size() < 2)
    throw std::invalid_argument("convergence_ratios: need at least two errors");
  for (double e : errors)
    if (!(e > 0))
      throw std::invalid_argument("convergence_ratios: errors must be positive");
  std::vector<double> out(errors.size() - 1);
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) out[i] = errors[i] / errors[i + 1];
  return out;
}

}  // namespace parastab
