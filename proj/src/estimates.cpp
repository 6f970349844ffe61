#include "parastab/estimates.hpp"

#include <cmath>
#include <limits>

namespace parastab {

double theta(double r, double th1, double th2, int d) {
  if (r <= 0) throw std::invalid_argument("theta: window length must be positive");
  if (d <= 0) throw std::invalid_argument("theta: dimension must be positive");
  return 1.0 + th1 * th1 + d * th2 * th2 + 1.0 / r + r * (th1 + d * th2 * th2);
}

namespace {

// Θ̄(ξ₁,ξ₂,ξ₃,d) = D̂(1+ξ₁²+dξ₂²) + 2√D̂ · √(D_rc ξ₃² + D̂(ξ₁+dξ₂²))
double theta_bar(const TheoryParams& p) {
  const double inner = p.D_rc * p.n_W * p.n_W +
                       p.D_hat * (p.n_a + p.d * p.n_b * p.n_b);
  return p.D_hat * (1.0 + p.n_a * p.n_a + p.d * p.n_b * p.n_b) +
         2.0 * std::sqrt(p.D_hat) * std::sqrt(inner);
}

}  // namespace

TStarUpsilon t_star_upsilon(const TheoryParams& p) {
  if (p.d <= 0) throw std::invalid_argument("t_star_upsilon: dimension must be positive");
  if (p.D_rc <= 0 || p.D_hat <= 0)
    throw std::invalid_argument("t_star_upsilon: constants must be positive");
  TStarUpsilon out;
  const double denom = p.D_rc * p.n_W * p.n_W +
                       p.D_hat * (p.n_a + p.d * p.n_b * p.n_b);
  if (denom <= 0) {
    out.T_star = std::numeric_limits<double>::infinity();
  } else {
    out.T_star = std::sqrt(p.D_hat / denom);
  }
  out.upsilon = 2.0 * p.iota * p.iota * std::exp(theta_bar(p));
  return out;
}

double ball_volume(int d) {
  if (d <= 0) throw std::invalid_argument("ball_volume: dimension must be positive");
  return std::pow(std::acos(-1.0), 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

ActuatorBounds actuator_bounds(const TheoryParams& p) {
  if (p.d <= 0) throw std::invalid_argument("actuator_bounds: dimension must be positive");
  if (p.w_R_volume <= 0)
    throw std::invalid_argument("actuator_bounds: reference cell volume must be positive");
  const double pi = std::acos(-1.0);
  ActuatorBounds out;
  out.ball_vol = ball_volume(p.d);
  const double d = p.d;
  out.D_d = 4.0 * d * pi * pi /
            ((d + 2.0) * std::pow(p.w_R_volume, 2.0 / d) *
             std::pow(out.ball_vol, 2.0 / d));
  const double upsilon = t_star_upsilon(p).upsilon;
  out.M_eig_raw = std::pow(out.D_d, -0.5 * d) *
                  std::pow(4.0 * p.chi_norm * p.chi_norm * upsilon, 0.5 * d);
  out.M_pc_raw = std::pow(p.l_bar * p.l_bar * upsilon / (pi * pi), 0.5 * d);
  out.M_simple_raw =
      std::pow(p.D_rc * std::exp(1.0) * (d + 2.0) / (d * pi * pi), 0.5 * d) *
      p.domain_volume * out.ball_vol * std::pow(p.n_W, d);
  out.M_eig = static_cast<long>(std::ceil(out.M_eig_raw));
  out.M_pc = static_cast<long>(std::ceil(out.M_pc_raw));
  out.M_simple = static_cast<long>(std::ceil(out.M_simple_raw));
  out.T_star_part = (p.n_W > 0)
                        ? 1.0 / (2.0 * p.D_rc * p.n_W * p.n_W)
                        : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace parastab
