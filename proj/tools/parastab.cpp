// parastab — synthesize Riccati feedback controls for parabolic equations on
// the unit disk and run the experiment catalog end to end.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "parastab/analysis.hpp"
#include "parastab/config.hpp"
#include "parastab/csv.hpp"
#include "parastab/estimates.hpp"
#include "parastab/mesh.hpp"
#include "parastab/riccati.hpp"
#include "parastab/sim_linear.hpp"
#include "parastab/sim_nonlinear.hpp"
#include "parastab/svg.hpp"

namespace fs = std::filesystem;
using namespace parastab;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmtg(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  double v;
  while (in >> v) out.push_back(v);
  return out;
}

struct RunContext {
  ConfigFile cfg;
  fs::path out_dir;
  std::string experiment;

  Mesh mesh;
  FemOperators ops;
  double T = 0;
  int N_t = 0;
  double k = 0;

  void init_mesh_and_time() {
    cfg.require_section("time");
    T = cfg.num("time", "T");
    N_t = static_cast<int>(cfg.integer("time", "steps"));
    if (T <= 0 || N_t < 2) throw ConfigError("need T > 0 and steps >= 2", "time");
    k = T / N_t;
    if (cfg.has("mesh", "file")) {
      std::ifstream in(cfg.get("mesh", "file"));
      if (!in) throw ConfigError("cannot open mesh file", "mesh", "file");
      std::ostringstream buf;
      buf << in.rdbuf();
      mesh = load_mesh(buf.str());
    } else {
      mesh = generate_disk_mesh(static_cast<int>(cfg.integer_or("mesh", "rings", 4)));
    }
    const long refines = cfg.integer_or("mesh", "refine", 0);
    const bool project = cfg.flag_or("mesh", "project", true);
    for (long r = 0; r < refines; ++r) mesh = refine(mesh, project);
    ops = assemble(mesh);
  }

  double nu() const { return cfg.num_or("physics", "nu", 0.25); }
  double lambda() const { return cfg.num_or("physics", "lambda", 2.0); }
  double varsigma() const { return cfg.num_or("physics", "varsigma", 10.0); }

  InternalActuatorSet internal_set() const {
    Rect omega{cfg.num_or("actuators", "x0", 0.0), cfg.num_or("actuators", "x1", 0.5),
               cfg.num_or("actuators", "y0", 0.0),
               cfg.num_or("actuators", "y1", 1.0 / 3.0)};
    const int m = static_cast<int>(cfg.integer_or("actuators", "m", 3));
    const int n = static_cast<int>(cfg.integer_or("actuators", "n", 2));
    const bool unrestricted = cfg.flag_or("actuators", "unrestricted", false);
    Vec chi;
    if (cfg.has("actuators", "chi"))
      chi = eval_at_nodes(cfg.expr("actuators", "chi"), ops.points, 0.0);
    return build_internal_actuators(ops, omega, m, n, chi, unrestricted);
  }

  BoundaryActuatorSet boundary_set(double varsigma_override = -1) const {
    const double theta0 = cfg.num_or("actuators", "theta0", kPi);
    const double theta1 = cfg.num_or("actuators", "theta1", 1.25 * kPi);
    const int M = static_cast<int>(cfg.integer_or("actuators", "count", 6));
    const double vs = varsigma_override > 0 ? varsigma_override : varsigma();
    const bool scaled = cfg.flag_or("actuators", "scaled_pi", false);
    return build_boundary_actuators(ops, theta0, theta1, M, vs, nu(), scaled);
  }

  ControlSchedule schedule() const {
    if (!cfg.has("schedule", "on")) return ControlSchedule::always();
    const std::vector<double> vals = parse_list(cfg.get("schedule", "on"));
    if (vals.size() % 2 != 0)
      throw ConfigError("schedule windows need an even count of endpoints",
                        "schedule", "on");
    ControlSchedule s;
    for (std::size_t i = 0; i + 1 < vals.size(); i += 2)
      s.on_intervals.emplace_back(vals[i], vals[i + 1]);
    return s;
  }

  // Nodal initial state. Boundary values are not touched here; the callers
  // reconcile them with the actuator trace (boundary runs) or zero them
  // (homogeneous internal runs).
  Vec initial_condition() const {
    const std::string kind = cfg.get_or("ic", "kind", "expr");
    if (kind == "expr") {
      return eval_at_nodes(cfg.expr_or("ic", "v0", "sin(2*x1)*cos(x2)"), ops.points, 0.0);
    }
    if (kind == "indicator") {
      // 1 where x1 < threshold (the grammar has no step function)
      const double thr = cfg.num_or("ic", "threshold", -1.0 / 3.0);
      Vec v = Vec::Zero(ops.n_points());
      for (int i = 0; i < ops.n_points(); ++i)
        if (ops.points[i].x < thr) v[i] = 1.0;
      return v;
    }
    if (kind == "elliptic") {
      const Vec beta_r = eval_at_nodes(cfg.expr_or("ic", "beta_r", "sin(x1)+x2"),
                                       ops.points, 0.0);
      const Vec bc1 = eval_at_nodes(cfg.expr_or("ic", "beta_c1", "2*x1*x2"),
                                    ops.points, 0.0);
      const Vec bc2 = eval_at_nodes(cfg.expr_or("ic", "beta_c2", "-2*sin(x2)"),
                                    ops.points, 0.0);
      const Vec h = eval_at_nodes(cfg.expr_or("ic", "h", "cos(3*x2)^2+sin(x1)+2"),
                                  ops.points, 0.0);
      Vec g_b = Vec::Zero(ops.n_b);
      if (cfg.has("ic", "rho")) {
        const std::vector<double> rho = parse_list(cfg.get("ic", "rho"));
        const BoundaryActuatorSet bset = boundary_set();
        if (static_cast<int>(rho.size()) != bset.count())
          throw ConfigError("rho length must match actuator count", "ic", "rho");
        for (int i = 0; i < bset.count(); ++i)
          g_b += rho[i] * bset.psi_traces.col(i);
      }
      return solve_elliptic(ops, cfg.num_or("ic", "mu", 0.5), beta_r, bc1, bc2, h, g_b);
    }
    if (kind == "psi_sum") {
      // v0 = Σ c_i Ψ̃_i using the raw harmonic extensions, compatible with
      // κ(0) = c by construction.
      const std::vector<double> c = parse_list(cfg.get("ic", "coeffs"));
      const BoundaryActuatorSet bset = boundary_set();
      if (static_cast<int>(c.size()) != bset.count())
        throw ConfigError("coeffs length must match actuator count", "ic", "coeffs");
      Vec v = Vec::Zero(ops.n_points());
      for (int i = 0; i < bset.count(); ++i) v += c[i] * bset.psi_extensions.col(i);
      return v;
    }
    throw ConfigError("unknown ic kind: " + kind, "ic", "kind");
  }

  Vec kappa0(const BoundaryActuatorSet& set) const {
    if (cfg.get_or("ic", "kind", "expr") == "psi_sum") {
      const std::vector<double> c = parse_list(cfg.get("ic", "coeffs"));
      return Eigen::Map<const Vec>(c.data(), static_cast<long>(c.size()));
    }
    if (cfg.has("ic", "kappa")) {
      const std::vector<double> c = parse_list(cfg.get("ic", "kappa"));
      if (static_cast<int>(c.size()) != set.count())
        throw ConfigError("kappa length must match actuator count", "ic", "kappa");
      return Eigen::Map<const Vec>(c.data(), static_cast<long>(c.size()));
    }
    return Vec::Zero(set.count());
  }

  void write_manifest() const {
    std::ofstream out(out_dir / "manifest.txt");
    out << "experiment=" << experiment << '\n'
        << "config_hash=" << cfg.hash() << '\n'
        << "format_version=1\n"
        << "mesh_points=" << ops.n_points() << '\n'
        << "mesh_interior=" << ops.n_i << '\n'
        << "T=" << fmtg(T) << '\n'
        << "steps=" << N_t << '\n';
  }
};

RiccatiPath solve_path(const RunContext& ctx, const RiccatiProblem& pb,
                       int extra_identity) {
  const Mat H0 = homotopy_h0(ctx.ops, extra_identity);
  const Mat Pi_T = homotopy_init(pb.X.back(), pb.R, pb.C, H0);
  return solve_dre_backward(pb, Pi_T);
}

// CSV rows t, normH2 (unshifted solution), weighted_normH2 (shifted), cost,
// and per-actuator control columns.
void write_trajectory_csv(const RunContext& ctx, const Trajectory& traj,
                          const std::vector<double>& cost, double lambda,
                          const std::string& control_prefix, const std::string& name) {
  const Eigen::MatrixXd& ctrl =
      control_prefix == "kappa" ? traj.kappa : traj.control;
  std::vector<std::string> cols = {"t", "normH2", "weighted_normH2", "cost"};
  for (int i = 0; i < ctrl.rows(); ++i)
    cols.push_back(control_prefix + "_" + std::to_string(i + 1));
  std::vector<std::vector<double>> rows;
  rows.reserve(traj.N_t + 1);
  for (int j = 0; j <= traj.N_t; ++j) {
    std::vector<double> row;
    const double t = traj.time_at(j);
    row.push_back(t);
    row.push_back(std::exp(-lambda * t) * traj.norm_sq[j]);
    row.push_back(traj.norm_sq[j]);
    row.push_back(cost.empty() ? 0.0 : cost[j]);
    for (int i = 0; i < ctrl.rows(); ++i)
      row.push_back(ctrl.cols() > j ? ctrl(i, j) : 0.0);
    rows.push_back(std::move(row));
  }
  write_csv((ctx.out_dir / name).string(), cols, rows);
}

void write_norm_svg(const RunContext& ctx, const std::vector<PlotSeries>& series,
                    const std::string& name, const std::string& title) {
  bool log_ok = true;
  for (const auto& s : series)
    for (double v : s.y)
      if (!(v > 0) || !std::isfinite(v)) log_ok = false;
  try {
    emit_svg(series, log_ok, (ctx.out_dir / name).string(), title);
  } catch (const NonPositiveLogValue&) {
    emit_svg(series, false, (ctx.out_dir / name).string(), title);
  }
}

void write_summary(const RunContext& ctx, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream out(ctx.out_dir / "summary.txt");
  for (const auto& [k, v] : kv) out << k << "=" << v << '\n';
}

PlotSeries norm_series(const Trajectory& traj, double lambda, const std::string& label,
                       bool shifted) {
  PlotSeries s;
  s.label = label;
  for (int j = 0; j <= traj.N_t; ++j) {
    s.x.push_back(traj.time_at(j));
    s.y.push_back(shifted ? traj.norm_sq[j]
                          : std::exp(-lambda * traj.time_at(j)) * traj.norm_sq[j]);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Linear experiments

int run_stabilize_internal(RunContext& ctx, bool controlled) {
  ctx.init_mesh_and_time();
  const double lambda = ctx.lambda(), nu = ctx.nu();
  const CoefficientField coeff = coefficients_from_config(ctx.cfg);
  const InternalActuatorSet set = ctx.internal_set();
  Vec z0 = ctx.initial_condition();
  z0.tail(ctx.ops.n_b).setZero();  // homogeneous Dirichlet problem

  RiccatiPath path;
  std::vector<double> cost;
  Trajectory traj;
  if (controlled) {
    const RiccatiProblem pb =
        internal_riccati_problem(ctx.ops, coeff, set, lambda, nu, ctx.T, ctx.N_t);
    path = solve_path(ctx, pb, 0);
    traj = simulate_internal(ctx.ops, coeff, set, path, lambda, nu, z0, ctx.schedule());
    cost = cost_series(path, traj);
  } else {
    path = RiccatiPath::constant(Mat::Zero(ctx.ops.n_i, ctx.ops.n_i), ctx.N_t, ctx.k);
    traj = simulate_internal(ctx.ops, coeff, set, path, lambda, nu, z0,
                             ControlSchedule::never());
  }

  const DecayMetrics dm = decay_metrics(traj, lambda);
  write_trajectory_csv(ctx, traj, cost, lambda, "u", "trajectory.csv");
  write_norm_svg(ctx, {norm_series(traj, lambda, "|y|^2_H", false)}, "norms.svg",
                 "internal " + std::string(controlled ? "closed-loop" : "uncontrolled"));
  write_summary(ctx, {{"weighted_sup", fmtg(dm.weighted_sup)},
                      {"final_ratio", fmtg(dm.final_ratio)},
                      {"stabilized", dm.stabilized ? "true" : "false"},
                      {"blow_up", traj.blow_up ? "true" : "false"}});
  ctx.write_manifest();
  return 0;
}

int run_stabilize_boundary(RunContext& ctx) {
  ctx.init_mesh_and_time();
  const double lambda = ctx.lambda(), nu = ctx.nu();
  const CoefficientField coeff = coefficients_from_config(ctx.cfg);
  const BoundaryActuatorSet set = ctx.boundary_set();
  Vec z0 = ctx.initial_condition();
  const Vec kap0 = ctx.kappa0(set);
  z0.tail(ctx.ops.n_b) = set.psi_traces * kap0;  // enforce trace compatibility

  const RiccatiProblem pb =
      boundary_riccati_problem(ctx.ops, coeff, set, lambda, nu, ctx.T, ctx.N_t);
  const RiccatiPath path = solve_path(ctx, pb, set.count());
  const Trajectory traj =
      simulate_boundary(ctx.ops, coeff, set, path, lambda, nu, z0, kap0, ctx.schedule());
  const std::vector<double> cost = cost_series(path, traj);

  const DecayMetrics dm = decay_metrics(traj, lambda);
  write_trajectory_csv(ctx, traj, cost, lambda, "kappa", "trajectory.csv");
  write_norm_svg(ctx, {norm_series(traj, lambda, "|y|^2_H", false)}, "norms.svg",
                 "boundary closed-loop");
  write_summary(ctx, {{"weighted_sup", fmtg(dm.weighted_sup)},
                      {"final_ratio", fmtg(dm.final_ratio)},
                      {"stabilized", dm.stabilized ? "true" : "false"},
                      {"blow_up", traj.blow_up ? "true" : "false"}});
  ctx.write_manifest();
  return 0;
}

int run_actuator_sweep(RunContext& ctx) {
  ctx.init_mesh_and_time();
  const double lambda = ctx.lambda(), nu = ctx.nu();
  const CoefficientField coeff = coefficients_from_config(ctx.cfg);
  Vec z0 = ctx.initial_condition();
  z0.tail(ctx.ops.n_b).setZero();

  std::vector<double> arr =
      parse_list(ctx.cfg.get_or("sweep", "arrangements", "1 1 2 1 2 2 3 2"));
  if (arr.size() % 2 != 0)
    throw ConfigError("arrangements needs pairs of integers", "sweep", "arrangements");

  std::vector<std::vector<double>> rows;
  std::vector<PlotSeries> series;
  for (std::size_t p = 0; p + 1 < arr.size(); p += 2) {
    const int m = static_cast<int>(arr[p]), n = static_cast<int>(arr[p + 1]);
    ctx.cfg.apply_override("actuators.m=" + std::to_string(m));
    ctx.cfg.apply_override("actuators.n=" + std::to_string(n));
    const InternalActuatorSet set = ctx.internal_set();
    const RiccatiProblem pb =
        internal_riccati_problem(ctx.ops, coeff, set, lambda, nu, ctx.T, ctx.N_t);
    const RiccatiPath path = solve_path(ctx, pb, 0);
    const Trajectory traj =
        simulate_internal(ctx.ops, coeff, set, path, lambda, nu, z0);
    const std::vector<double> cost = cost_series(path, traj);
    const DecayMetrics dm = decay_metrics(traj, lambda);
    rows.push_back({static_cast<double>(m), static_cast<double>(n),
                    static_cast<double>(set.count()), dm.weighted_sup, dm.final_ratio,
                    cost.front(), traj.norm_sq.back()});
    const std::string label = "(m,n)=(" + std::to_string(m) + "," + std::to_string(n) + ")";
    series.push_back(norm_series(traj, lambda, label, true));
    write_trajectory_csv(ctx, traj, cost, lambda, "u",
                         "trajectory_m" + std::to_string(m) + "_n" + std::to_string(n) +
                             ".csv");
  }
  write_csv((ctx.out_dir / "sweep.csv").string(),
            {"m", "n", "actuators", "weighted_sup", "final_ratio", "cost0",
             "final_weighted_normH2"},
            rows);
  write_norm_svg(ctx, series, "norms.svg", "actuator-count sweep");
  ctx.write_manifest();
  return 0;
}

int run_lambda_sweep(RunContext& ctx) {
  ctx.init_mesh_and_time();
  const double nu = ctx.nu();
  const CoefficientField coeff = coefficients_from_config(ctx.cfg);
  ctx.cfg.apply_override("actuators.unrestricted=true");
  const InternalActuatorSet set = ctx.internal_set();
  Vec z0 = ctx.initial_condition();
  z0.tail(ctx.ops.n_b).setZero();

  const std::vector<double> lambdas =
      parse_list(ctx.cfg.get_or("sweep", "lambdas", "0 1 2 3 4 5 6 7 8 9 10"));
  std::vector<std::vector<double>> rows;
  for (double lambda : lambdas) {
    // stationary coefficients: a single ARE gives the whole kernel path
    const RiccatiProblem pb =
        internal_riccati_problem(ctx.ops, coeff, set, lambda, nu, ctx.T, 1);
    const Mat Pi_inf = homotopy_init(pb.X.front(), pb.R, pb.C, homotopy_h0(ctx.ops, 0));
    const RiccatiPath path = RiccatiPath::constant(Pi_inf, ctx.N_t, ctx.k);
    const Trajectory traj = simulate_internal(ctx.ops, coeff, set, path, lambda, nu, z0);
    std::vector<double> orig(traj.norm_sq.size());
    for (std::size_t j = 0; j < orig.size(); ++j)
      orig[j] = std::exp(-lambda * ctx.k * static_cast<double>(j)) * traj.norm_sq[j];
    rows.push_back({lambda, m_lambda(orig, lambda, ctx.k)});
  }
  write_csv((ctx.out_dir / "m_lambda.csv").string(), {"lambda", "m_lambda"}, rows);
  PlotSeries s{"m_lambda", {}, {}};
  for (const auto& r : rows) {
    s.x.push_back(r[0]);
    s.y.push_back(r[1]);
  }
  emit_svg({s}, false, (ctx.out_dir / "m_lambda.svg").string(), "transient bound probe");
  ctx.write_manifest();
  return 0;
}

int run_varsigma_sweep(RunContext& ctx) {
  ctx.init_mesh_and_time();
  const double lambda = ctx.lambda(), nu = ctx.nu();
  const CoefficientField coeff = coefficients_from_config(ctx.cfg);
  const std::vector<double> sigmas = parse_list(ctx.cfg.get_or("sweep", "varsigmas", "1 5 10 50"));
  std::vector<std::vector<double>> rows;
  std::vector<PlotSeries> series;
  for (double vs : sigmas) {
    const BoundaryActuatorSet set = ctx.boundary_set(vs);
    Vec z0 = ctx.initial_condition();
    const Vec kap0 = ctx.kappa0(set);
    z0.tail(ctx.ops.n_b) = set.psi_traces * kap0;
    const RiccatiProblem pb =
        boundary_riccati_problem(ctx.ops, coeff, set, lambda, nu, ctx.T, ctx.N_t);
    const RiccatiPath path = solve_path(ctx, pb, set.count());
    const Trajectory traj =
        simulate_boundary(ctx.ops, coeff, set, path, lambda, nu, z0, kap0);
    const DecayMetrics dm = decay_metrics(traj, lambda);
    rows.push_back({vs, dm.weighted_sup, dm.final_ratio});
    series.push_back(norm_series(traj, lambda, "varsigma=" + fmtg(vs), true));
  }
  write_csv((ctx.out_dir / "sweep.csv").string(),
            {"varsigma", "weighted_sup", "final_ratio"}, rows);
  write_norm_svg(ctx, series, "norms.svg", "varsigma sweep");
  ctx.write_manifest();
  return 0;
}

int run_replay(RunContext& ctx) {
  ctx.init_mesh_and_time();
  const double lambda = ctx.lambda(), nu = ctx.nu();
  const CoefficientField coeff = coefficients_from_config(ctx.cfg);
  const BoundaryActuatorSet set = ctx.boundary_set();
  Vec z0 = ctx.initial_condition();
  const Vec kap0 = ctx.kappa0(set);
  z0.tail(ctx.ops.n_b) = set.psi_traces * kap0;

  const RiccatiProblem pb =
      boundary_riccati_problem(ctx.ops, coeff, set, lambda, nu, ctx.T, ctx.N_t);
  const RiccatiPath path = solve_path(ctx, pb, set.count());
  const Trajectory closed =
      simulate_boundary(ctx.ops, coeff, set, path, lambda, nu, z0, kap0);
  const Trajectory replay =
      replay_open_loop(ctx.ops, coeff, set, closed.kappa, lambda, nu, z0, ctx.T);

  const double rel = ctx.cfg.num_or("replay", "perturbation", 1e-3);
  Vec z0p = z0;
  z0p.head(ctx.ops.n_i) *= (1.0 + rel);
  const Trajectory perturbed =
      replay_open_loop(ctx.ops, coeff, set, closed.kappa, lambda, nu, z0p, ctx.T);

  double max_diff = 0;
  for (int j = 0; j <= ctx.N_t; ++j)
    max_diff = std::max(max_diff,
                        (closed.z.col(j) - replay.z.col(j)).lpNorm<Eigen::Infinity>());
  const DecayMetrics dm_closed = decay_metrics(closed, lambda);
  const DecayMetrics dm_pert = decay_metrics(perturbed, lambda);

  std::vector<std::vector<double>> rows;
  for (int j = 0; j <= ctx.N_t; ++j)
    rows.push_back({closed.time_at(j), closed.norm_sq[j], replay.norm_sq[j],
                    perturbed.norm_sq[j]});
  write_csv((ctx.out_dir / "replay.csv").string(),
            {"t", "closed_weighted_normH2", "replay_weighted_normH2",
             "perturbed_weighted_normH2"},
            rows);
  write_norm_svg(ctx,
                 {norm_series(closed, lambda, "closed-loop", true),
                  norm_series(perturbed, lambda, "perturbed replay", true)},
                 "norms.svg", "open-loop replay");
  write_summary(ctx, {{"replay_max_diff", fmtg(max_diff)},
                      {"closed_weighted_sup", fmtg(dm_closed.weighted_sup)},
                      {"perturbed_weighted_sup", fmtg(dm_pert.weighted_sup)}});
  ctx.write_manifest();
  return 0;
}

int run_switching(RunContext& ctx) {
  ctx.init_mesh_and_time();
  const double lambda = ctx.lambda(), nu = ctx.nu();
  const CoefficientField coeff = coefficients_from_config(ctx.cfg);
  const BoundaryActuatorSet set = ctx.boundary_set();
  Vec z0 = ctx.initial_condition();
  const Vec kap0 = ctx.kappa0(set);
  z0.tail(ctx.ops.n_b) = set.psi_traces * kap0;

  const RiccatiProblem pb =
      boundary_riccati_problem(ctx.ops, coeff, set, lambda, nu, ctx.T, ctx.N_t);
  const RiccatiPath path = solve_path(ctx, pb, set.count());
  const Trajectory switched =
      simulate_boundary(ctx.ops, coeff, set, path, lambda, nu, z0, kap0, ctx.schedule());
  const Trajectory always =
      simulate_boundary(ctx.ops, coeff, set, path, lambda, nu, z0, kap0);

  std::vector<std::vector<double>> rows;
  for (int j = 0; j <= ctx.N_t; ++j)
    rows.push_back({switched.time_at(j), switched.norm_sq[j], always.norm_sq[j]});
  write_csv((ctx.out_dir / "switching.csv").string(),
            {"t", "switched_weighted_normH2", "always_weighted_normH2"}, rows);
  write_norm_svg(ctx,
                 {norm_series(switched, lambda, "switched", true),
                  norm_series(always, lambda, "always on", true)},
                 "norms.svg", "control switching");
  const DecayMetrics dm_s = decay_metrics(switched, lambda);
  const DecayMetrics dm_a = decay_metrics(always, lambda);
  write_summary(ctx, {{"switched_weighted_sup", fmtg(dm_s.weighted_sup)},
                      {"always_weighted_sup", fmtg(dm_a.weighted_sup)}});
  ctx.write_manifest();
  return 0;
}

// ---------------------------------------------------------------------------
// Nonlinear experiments

NonlinearProblem nonlinear_problem(const RunContext& ctx) {
  const Expr yhat =
      ctx.cfg.expr_or("nonlinear", "yhat", "(2*x1^3 + x2^2)*sin(t)");
  return make_nonlinear_problem(yhat, ctx.cfg.num_or("physics", "nu", 0.2),
                                ctx.cfg.num_or("nonlinear", "c1", -2.0),
                                ctx.cfg.num_or("nonlinear", "c2", -1.0),
                                ctx.cfg.num_or("nonlinear", "c3", -3.0));
}

Scheme scheme_from(const std::string& name) {
  if (name == "extrapolation") return Scheme::Extrapolation;
  if (name == "heun") return Scheme::Heun;
  if (name == "newton") return Scheme::Newton;
  throw ConfigError("unknown scheme: " + name, "nonlinear", "scheme");
}

NonlinearOptions nonlinear_options(const RunContext& ctx) {
  NonlinearOptions opt;
  opt.scheme = scheme_from(ctx.cfg.get_or("nonlinear", "scheme", "extrapolation"));
  opt.newton_tol = ctx.cfg.num_or("nonlinear", "newton_tol", 1e-12);
  opt.newton_cap = static_cast<int>(ctx.cfg.integer_or("nonlinear", "newton_cap", 50));
  opt.diagonal_jacobian = ctx.cfg.flag_or("nonlinear", "diagonal_jacobian", false);
  return opt;
}

// Samples the linearization coefficients along ŷ on the time grid.
void sample_linearization(const RunContext& ctx, const NonlinearProblem& np,
                          std::vector<Vec>& a, std::vector<Vec>& b1,
                          std::vector<Vec>& b2) {
  const CoefficientField lin = linearized_coefficients(np);
  a.resize(ctx.N_t + 1);
  b1.resize(ctx.N_t + 1);
  b2.resize(ctx.N_t + 1);
  for (int j = 0; j <= ctx.N_t; ++j) {
    const double t = ctx.k * j;
    a[j] = eval_at_nodes(lin.a, ctx.ops.points, t);
    b1[j] = eval_at_nodes(lin.b1, ctx.ops.points, t);
    b2[j] = eval_at_nodes(lin.b2, ctx.ops.points, t);
  }
}

struct NonlinearRun {
  Trajectory traj;
  std::vector<double> dev_sq;    // |y−ŷ|²_H per node
  double dev_weighted_sup = 0;   // sup e^{λt}|y−ŷ|²/|y0−ŷ0|²
  double mean_newton = 0;
};

NonlinearRun run_nonlinear_once(const RunContext& ctx, const NonlinearProblem& np,
                                const NonlinearOptions& opt, const Vec& y0,
                                double lambda, const InternalFeedback* ifb,
                                const BoundaryFeedback* bfb) {
  NonlinearRun run;
  run.traj = simulate_nonlinear(ctx.ops, np, ctx.T, ctx.N_t, y0, opt, ifb, bfb);
  run.dev_sq.assign(ctx.N_t + 1, std::numeric_limits<double>::infinity());
  double dev0 = 0;
  for (int j = 0; j <= ctx.N_t; ++j) {
    if (run.traj.blow_up && j >= run.traj.blow_up_step) break;
    const Vec yhat = eval_at_nodes(np.yhat, ctx.ops.points, ctx.k * j);
    run.dev_sq[j] = h_norm_sq(ctx.ops, run.traj.z.col(j) - yhat);
    if (j == 0) dev0 = std::max(run.dev_sq[0], 1e-300);
    run.dev_weighted_sup = std::max(
        run.dev_weighted_sup, std::exp(lambda * ctx.k * j) * run.dev_sq[j] / dev0);
  }
  if (run.traj.blow_up) run.dev_weighted_sup = std::numeric_limits<double>::infinity();
  if (!run.traj.newton_iters.empty()) {
    long total = 0;
    for (int n : run.traj.newton_iters) total += n;
    run.mean_newton =
        static_cast<double>(total) / static_cast<double>(run.traj.newton_iters.size());
  }
  return run;
}

// Builds the feedback ingredients shared by `nonlinear` and the threshold
// search; feedback kind: none | internal | boundary.
struct NonlinearFeedback {
  std::string kind;
  InternalActuatorSet iset;
  BoundaryActuatorSet bset;
  RiccatiPath path;
  Vec rho;  // boundary κ-direction of the initial deviation
};

NonlinearFeedback build_nonlinear_feedback(RunContext& ctx, const NonlinearProblem& np,
                                           double lambda) {
  NonlinearFeedback fb;
  fb.kind = ctx.cfg.get_or("nonlinear", "feedback", "internal");
  if (fb.kind == "none") return fb;
  std::vector<Vec> a, b1, b2;
  sample_linearization(ctx, np, a, b1, b2);
  const double nu = np.nu;
  if (fb.kind == "internal") {
    fb.iset = ctx.internal_set();
    const RiccatiProblem pb = internal_riccati_problem_sampled(ctx.ops, a, b1, b2,
                                                              fb.iset, lambda, nu, ctx.T);
    fb.path = solve_path(ctx, pb, 0);
  } else if (fb.kind == "boundary") {
    fb.bset = ctx.boundary_set();
    const RiccatiProblem pb = boundary_riccati_problem_sampled(ctx.ops, a, b1, b2,
                                                               fb.bset, lambda, nu, ctx.T);
    fb.path = solve_path(ctx, pb, fb.bset.count());
    std::vector<double> rho =
        parse_list(ctx.cfg.get_or("ic", "rho", "1 1 0 0.5 0 0"));
    if (static_cast<int>(rho.size()) != fb.bset.count())
      throw ConfigError("rho length must match actuator count", "ic", "rho");
    fb.rho = Eigen::Map<const Vec>(rho.data(), static_cast<long>(rho.size()));
  } else {
    throw ConfigError("unknown feedback kind: " + fb.kind, "nonlinear", "feedback");
  }
  return fb;
}

// y0 = ŷ(0) + ε v0; boundary feedback also needs κ0 = ε ϱ and a v0 whose trace
// is Σ ϱ_i Ψ_i so the deviation is compatible.
Vec nonlinear_initial_state(const RunContext& ctx, const NonlinearProblem& np,
                            const NonlinearFeedback& fb, double epsilon, Vec* kappa0) {
  Vec v0;
  if (fb.kind == "boundary") {
    RunContext& mut = const_cast<RunContext&>(ctx);
    if (!mut.cfg.has("ic", "kind")) mut.cfg.apply_override("ic.kind=elliptic");
    if (!mut.cfg.has("ic", "rho"))
      mut.cfg.apply_override("ic.rho=" + [&] {
        std::string s;
        for (int i = 0; i < fb.rho.size(); ++i) s += fmtg(fb.rho[i]) + " ";
        return s;
      }());
    v0 = mut.initial_condition();
    if (kappa0) *kappa0 = epsilon * fb.rho;
  } else {
    v0 = ctx.initial_condition();
    v0.tail(ctx.ops.n_b).setZero();
    if (kappa0) kappa0->resize(0);
  }
  const Vec yhat0 = eval_at_nodes(np.yhat, ctx.ops.points, 0.0);
  return yhat0 + epsilon * v0;
}

int run_nonlinear(RunContext& ctx) {
  ctx.init_mesh_and_time();
  const NonlinearProblem np = nonlinear_problem(ctx);
  const NonlinearOptions opt = nonlinear_options(ctx);
  const double lambda = ctx.cfg.num_or("physics", "lambda", 1.0);
  NonlinearFeedback fb = build_nonlinear_feedback(ctx, np, lambda);

  const std::vector<double> epsilons =
      parse_list(ctx.cfg.get_or("nonlinear", "epsilons", "0.1"));
  std::vector<std::vector<double>> rows;
  std::vector<PlotSeries> series;
  for (double eps : epsilons) {
    Vec kap0;
    const Vec y0 = nonlinear_initial_state(ctx, np, fb, eps, &kap0);
    InternalFeedback ifb{&fb.iset, &fb.path};
    BoundaryFeedback bfb{&fb.bset, &fb.path, kap0};
    const NonlinearRun run = run_nonlinear_once(
        ctx, np, opt, y0, lambda, fb.kind == "internal" ? &ifb : nullptr,
        fb.kind == "boundary" ? &bfb : nullptr);
    rows.push_back({eps, run.dev_weighted_sup,
                    run.traj.blow_up ? 1.0 : 0.0, run.mean_newton});
    PlotSeries s{"eps=" + fmtg(eps), {}, {}};
    std::vector<std::vector<double>> traj_rows;
    for (int j = 0; j <= ctx.N_t; ++j) {
      s.x.push_back(ctx.k * j);
      s.y.push_back(run.dev_sq[j]);
      traj_rows.push_back({ctx.k * j, run.dev_sq[j], run.traj.norm_sq[j]});
    }
    write_csv((ctx.out_dir / ("deviation_eps" + fmtg(eps) + ".csv")).string(),
              {"t", "deviation_normH2", "normH2"}, traj_rows);
    series.push_back(std::move(s));
  }
  write_csv((ctx.out_dir / "nonlinear.csv").string(),
            {"epsilon", "dev_weighted_sup", "blow_up", "mean_newton_iters"}, rows);
  write_norm_svg(ctx, series, "deviation.svg", "nonlinear deviation |y-yhat|^2");
  ctx.write_manifest();
  return 0;
}

int run_nonlinear_threshold(RunContext& ctx) {
  ctx.init_mesh_and_time();
  const NonlinearProblem np = nonlinear_problem(ctx);
  const NonlinearOptions opt = nonlinear_options(ctx);
  const double lambda = ctx.cfg.num_or("physics", "lambda", 1.0);
  NonlinearFeedback fb = build_nonlinear_feedback(ctx, np, lambda);
  const double ceiling = ctx.cfg.num_or("nonlinear", "ceiling", 1e4);

  auto stable = [&](double eps) {
    Vec kap0;
    const Vec y0 = nonlinear_initial_state(ctx, np, fb, eps, &kap0);
    InternalFeedback ifb{&fb.iset, &fb.path};
    BoundaryFeedback bfb{&fb.bset, &fb.path, kap0};
    const NonlinearRun run = run_nonlinear_once(
        ctx, np, opt, y0, lambda, fb.kind == "internal" ? &ifb : nullptr,
        fb.kind == "boundary" ? &bfb : nullptr);
    return !run.traj.blow_up && run.dev_weighted_sup <= ceiling;
  };

  double lo = ctx.cfg.num_or("nonlinear", "eps_stable", 0.1);
  double hi = ctx.cfg.num_or("nonlinear", "eps_unstable", 1.0);
  std::vector<std::vector<double>> rows;
  if (!stable(lo)) {
    std::cerr << "eps_stable=" << lo << " is not stable; aborting bisection\n";
    return 2;
  }
  rows.push_back({lo, 1.0});
  if (stable(hi)) {
    std::cerr << "eps_unstable=" << hi << " is stable; aborting bisection\n";
    return 2;
  }
  rows.push_back({hi, 0.0});
  const double tol = ctx.cfg.num_or("nonlinear", "bisect_tol", 1e-2);
  while (std::abs(hi - lo) > tol) {
    const double mid = 0.5 * (lo + hi);
    const bool ok = stable(mid);
    rows.push_back({mid, ok ? 1.0 : 0.0});
    (ok ? lo : hi) = mid;
  }
  write_csv((ctx.out_dir / "threshold_probes.csv").string(), {"epsilon", "stable"}, rows);
  write_summary(ctx, {{"threshold_low", fmtg(lo)}, {"threshold_high", fmtg(hi)}});
  std::cout << "empirical stability threshold in [" << fmtg(lo) << ", " << fmtg(hi)
            << "]\n";
  ctx.write_manifest();
  return 0;
}

// Space-time error |y−ŷ| in the discrete Bochner norm.
double space_time_error(const FemOperators& ops, const NonlinearProblem& np,
                        const Trajectory& traj) {
  std::vector<double> s(traj.N_t + 1);
  for (int j = 0; j <= traj.N_t; ++j) {
    const Vec yhat = eval_at_nodes(np.yhat, ops.points, traj.time_at(j));
    s[j] = std::sqrt(h_norm_sq(ops, traj.z.col(j) - yhat));
  }
  return std::sqrt(bochner_norm_sq(s, traj.k));
}

int run_refinement(RunContext& ctx) {
  ctx.cfg.require_section("time");
  const double T = ctx.cfg.num_or("time", "T", 5.0);
  const int base_steps = static_cast<int>(ctx.cfg.integer("time", "steps"));
  const int base_rings = static_cast<int>(ctx.cfg.integer_or("mesh", "rings", 2));
  const int levels = static_cast<int>(ctx.cfg.integer_or("refinement", "levels", 4));
  if (levels < 2) throw ConfigError("need at least 2 levels", "refinement", "levels");

  const Expr yhat =
      ctx.cfg.expr_or("nonlinear", "yhat", "(t^2 - 2*t)*x1^3*sin(x2)^2");
  const NonlinearProblem np =
      make_nonlinear_problem(yhat, ctx.cfg.num_or("physics", "nu", 0.2),
                             ctx.cfg.num_or("nonlinear", "c1", -2.0),
                             ctx.cfg.num_or("nonlinear", "c2", -1.0),
                             ctx.cfg.num_or("nonlinear", "c3", -3.0));
  const NonlinearOptions opt = nonlinear_options(ctx);

  std::vector<double> errors;
  std::vector<std::vector<double>> rows;
  Mesh mesh = generate_disk_mesh(base_rings);
  int steps = base_steps;
  for (int level = 0; level < levels; ++level) {
    ctx.mesh = mesh;
    ctx.ops = assemble(mesh);
    ctx.T = T;
    ctx.N_t = steps;
    ctx.k = T / steps;
    const Vec y0 = eval_at_nodes(yhat, ctx.ops.points, 0.0);
    const Trajectory traj =
        simulate_nonlinear(ctx.ops, np, T, steps, y0, opt, nullptr, nullptr);
    const double err = space_time_error(ctx.ops, np, traj);
    errors.push_back(err);
    rows.push_back({static_cast<double>(level), static_cast<double>(ctx.ops.n_points()),
                    static_cast<double>(steps), err,
                    errors.size() > 1 ? errors[errors.size() - 2] / err : 0.0});
    mesh = refine(mesh, true);
    steps *= 2;
  }
  write_csv((ctx.out_dir / "refinement.csv").string(),
            {"level", "nodes", "steps", "error", "ratio"}, rows);
  std::cout << "last error ratio: " << fmtg(rows.back()[4]) << "\n";
  ctx.write_manifest();
  return 0;
}

int run_scheme_comparison(RunContext& ctx) {
  ctx.init_mesh_and_time();
  const Expr yhat =
      ctx.cfg.expr_or("nonlinear", "yhat", "(t^2 - 2*t)*x1^3*sin(x2)^2");
  const NonlinearProblem np =
      make_nonlinear_problem(yhat, ctx.cfg.num_or("physics", "nu", 0.2),
                             ctx.cfg.num_or("nonlinear", "c1", -2.0),
                             ctx.cfg.num_or("nonlinear", "c2", -1.0),
                             ctx.cfg.num_or("nonlinear", "c3", -3.0));
  const Vec y0 = eval_at_nodes(yhat, ctx.ops.points, 0.0);

  const char* names[3] = {"extrapolation", "heun", "newton"};
  const Scheme schemes[3] = {Scheme::Extrapolation, Scheme::Heun, Scheme::Newton};
  std::vector<Trajectory> trajs(3);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 3; ++i) {
    NonlinearOptions opt = nonlinear_options(ctx);
    opt.scheme = schemes[i];
    trajs[i] = simulate_nonlinear(ctx.ops, np, ctx.T, ctx.N_t, y0, opt, nullptr, nullptr);
    double mean_newton = 0;
    if (!trajs[i].newton_iters.empty()) {
      long total = 0;
      for (int n : trajs[i].newton_iters) total += n;
      mean_newton = static_cast<double>(total) /
                    static_cast<double>(trajs[i].newton_iters.size());
    }
    const double err = trajs[i].blow_up ? std::numeric_limits<double>::infinity()
                                        : space_time_error(ctx.ops, np, trajs[i]);
    rows.push_back({static_cast<double>(i), trajs[i].blow_up ? 1.0 : 0.0, err,
                    mean_newton});
    std::cout << names[i] << ": " << (trajs[i].blow_up ? "blow-up" : "completed")
              << ", space-time error " << fmtg(err) << "\n";
  }
  // pairwise scheme-vs-scheme discrepancies in the same norm
  std::vector<std::vector<double>> pair_rows;
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      double d = std::numeric_limits<double>::infinity();
      if (!trajs[a].blow_up && !trajs[b].blow_up) {
        std::vector<double> s(ctx.N_t + 1);
        for (int j = 0; j <= ctx.N_t; ++j)
          s[j] = std::sqrt(h_norm_sq(ctx.ops, trajs[a].z.col(j) - trajs[b].z.col(j)));
        d = std::sqrt(bochner_norm_sq(s, ctx.k));
      }
      pair_rows.push_back({static_cast<double>(a), static_cast<double>(b), d});
    }
  write_csv((ctx.out_dir / "schemes.csv").string(),
            {"scheme", "blow_up", "space_time_error", "mean_newton_iters"}, rows);
  write_csv((ctx.out_dir / "scheme_pairs.csv").string(),
            {"scheme_a", "scheme_b", "discrepancy"}, pair_rows);
  ctx.write_manifest();
  return 0;
}

int run_estimates(RunContext& ctx) {
  TheoryParams p;
  p.d = static_cast<int>(ctx.cfg.integer_or("estimates", "d", 2));
  p.r = ctx.cfg.num_or("estimates", "r", 2.0);
  p.n_a = ctx.cfg.num_or("estimates", "n_a", 1.0);
  p.n_b = ctx.cfg.num_or("estimates", "n_b", 1.0);
  p.n_W = ctx.cfg.num_or("estimates", "n_W", 1.0);
  p.D_rc = ctx.cfg.num_or("estimates", "D_rc", 1.0);
  p.D_hat = ctx.cfg.num_or("estimates", "D_hat", 1.0);
  p.iota = ctx.cfg.num_or("estimates", "iota", 1.0);
  p.chi_norm = ctx.cfg.num_or("estimates", "chi_norm", 1.0);
  p.domain_volume = ctx.cfg.num_or("estimates", "domain_volume", kPi);
  p.w_R_volume = ctx.cfg.num_or("estimates", "w_R_volume", 1.0 / 6.0);
  p.l_bar = ctx.cfg.num_or("estimates", "l_bar", 0.5);

  const double th = theta(p.r, p.n_a, p.n_b, p.d);
  const TStarUpsilon tu = t_star_upsilon(p);
  const ActuatorBounds ab = actuator_bounds(p);

  std::ostringstream table;
  table << "theta=" << fmtg(th) << '\n'
        << "T_star=" << fmtg(tu.T_star) << '\n'
        << "upsilon=" << fmtg(tu.upsilon) << '\n'
        << "ball_volume=" << fmtg(ab.ball_vol) << '\n'
        << "D_d=" << fmtg(ab.D_d) << '\n'
        << "M_eig_raw=" << fmtg(ab.M_eig_raw) << "  M_eig=" << ab.M_eig << '\n'
        << "M_pc_raw=" << fmtg(ab.M_pc_raw) << "  M_pc=" << ab.M_pc << '\n'
        << "M_simple_raw=" << fmtg(ab.M_simple_raw) << "  M_simple=" << ab.M_simple
        << '\n'
        << "T_star_part=" << fmtg(ab.T_star_part) << '\n';
  std::cout << table.str();
  std::ofstream out(ctx.out_dir / "estimates.txt");
  out << table.str();
  ctx.write_manifest();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riccati feedback stabilization of parabolic equations on the disk"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "INI config file");
  app.add_option("--set", overrides, "override as section.key=value (repeatable)");
  app.add_option("--out", out_dir, "output directory");

  const std::vector<std::pair<std::string, std::string>> experiments = {
      {"stabilize-linear-internal", "closed-loop internal feedback, linear system"},
      {"stabilize-linear-boundary", "closed-loop boundary feedback, linear system"},
      {"uncontrolled-linear", "free dynamics of the linear system"},
      {"actuator-sweep", "compare internal actuator arrangements"},
      {"lambda-sweep", "transient-bound probe m_lambda over a range of rates"},
      {"varsigma-sweep", "compare boundary dynamics parameters"},
      {"replay", "replay closed-loop boundary control in open loop"},
      {"switching", "switch the boundary feedback off and on"},
      {"nonlinear", "semilinear closed-loop runs for a range of epsilon"},
      {"nonlinear-threshold", "bisect the stability threshold in epsilon"},
      {"refinement", "manufactured-solution convergence study"},
      {"scheme-comparison", "compare the three semilinear time steppers"},
      {"estimates", "actuator-count and transient-bound calculator"},
  };
  for (const auto& [name, desc] : experiments)
    app.add_subcommand(name, desc)->fallthrough();

  CLI11_PARSE(app, argc, argv);
  const std::string chosen = app.get_subcommands().front()->get_name();

  RunContext ctx;
  ctx.experiment = chosen;
  try {
    if (!config_path.empty()) ctx.cfg = ConfigFile::load(config_path);
    for (const auto& o : overrides) ctx.cfg.apply_override(o);
    ctx.out_dir = out_dir;
    fs::create_directories(ctx.out_dir);

    if (chosen == "stabilize-linear-internal") return run_stabilize_internal(ctx, true);
    if (chosen == "uncontrolled-linear") return run_stabilize_internal(ctx, false);
    if (chosen == "stabilize-linear-boundary") return run_stabilize_boundary(ctx);
    if (chosen == "actuator-sweep") return run_actuator_sweep(ctx);
    if (chosen == "lambda-sweep") return run_lambda_sweep(ctx);
    if (chosen == "varsigma-sweep") return run_varsigma_sweep(ctx);
    if (chosen == "replay") return run_replay(ctx);
    if (chosen == "switching") return run_switching(ctx);
    if (chosen == "nonlinear") return run_nonlinear(ctx);
    if (chosen == "nonlinear-threshold") return run_nonlinear_threshold(ctx);
    if (chosen == "refinement") return run_refinement(ctx);
    if (chosen == "scheme-comparison") return run_scheme_comparison(ctx);
    if (chosen == "estimates") return run_estimates(ctx);
    std::cerr << "unknown experiment: " << chosen << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ExprSyntaxError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "simulation failure: " << e.what() << "\n";
    return 2;
  }
}
