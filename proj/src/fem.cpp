#include "parastab/fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <sstream>

namespace parastab {

namespace {

Blocks split(const SpMat& A, int n_i) {
  int n_b = static_cast<int>(A.rows()) - n_i;
  Blocks b;
  b.ii = A.block(0, 0, n_i, n_i);
  b.ib = A.block(0, n_i, n_i, n_b);
  b.bi = A.block(n_i, 0, n_b, n_i);
  b.bb = A.block(n_i, n_i, n_b, n_b);
  return b;
}

}  // namespace

FemOperators assemble(const Mesh& mesh) {
  FemOperators ops;
  ops.n_b = mesh.n_boundary();
  ops.n_i = mesh.n_interior();
  int sp = mesh.n_points();
  ops.points.resize(sp);
  ops.theta.assign(sp, 0.0);
  for (int i = 0; i < sp; ++i) {
    ops.points[i] = mesh.points[mesh.perm[i]];
    ops.theta[i] = mesh.theta[mesh.perm[i]];
  }

  using Trip = Eigen::Triplet<double>;
  std::vector<Trip> tm, ts, tg1, tg2;
  tm.reserve(mesh.triangles.size() * 9);
  ts.reserve(mesh.triangles.size() * 9);
  tg1.reserve(mesh.triangles.size() * 9);
  tg2.reserve(mesh.triangles.size() * 9);
  for (const auto& t : mesh.triangles) {
    const Point2 p[3] = {mesh.points[t[0]], mesh.points[t[1]], mesh.points[t[2]]};
    double area = 0.5 * ((p[1].x - p[0].x) * (p[2].y - p[0].y) -
                         (p[2].x - p[0].x) * (p[1].y - p[0].y));
    // grad φ_i = (b_i, c_i) / (2|T|) with the usual cyclic differences.
    double bg[3], cg[3];
    for (int i = 0; i < 3; ++i) {
      int j = (i + 1) % 3, l = (i + 2) % 3;
      bg[i] = p[j].y - p[l].y;
      cg[i] = p[l].x - p[j].x;
    }
    int idx[3] = {mesh.inv_perm[t[0]], mesh.inv_perm[t[1]], mesh.inv_perm[t[2]]};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        tm.emplace_back(idx[i], idx[j], area / 12.0 * (i == j ? 2.0 : 1.0));
        ts.emplace_back(idx[i], idx[j], (bg[i] * bg[j] + cg[i] * cg[j]) / (4.0 * area));
        tg1.emplace_back(idx[i], idx[j], bg[j] / 6.0);
        tg2.emplace_back(idx[i], idx[j], cg[j] / 6.0);
      }
  }
  ops.M.resize(sp, sp);
  ops.S.resize(sp, sp);
  ops.G1.resize(sp, sp);
  ops.G2.resize(sp, sp);
  ops.M.setFromTriplets(tm.begin(), tm.end());
  ops.S.setFromTriplets(ts.begin(), ts.end());
  ops.G1.setFromTriplets(tg1.begin(), tg1.end());
  ops.G2.setFromTriplets(tg2.begin(), tg2.end());
  ops.Mb = split(ops.M, ops.n_i);
  ops.Sb = split(ops.S, ops.n_i);
  ops.G1b = split(ops.G1, ops.n_i);
  ops.G2b = split(ops.G2, ops.n_i);
  return ops;
}

Vec eval_at_nodes(const Expr& e, const std::vector<Point2>& points, double t) {
  Vec v(points.size());
  for (size_t i = 0; i < points.size(); ++i)
    v[i] = eval(e, t, points[i].x, points[i].y);
  return v;
}

SpMat reaction_matrix(const FemOperators& ops, const Vec& a_bar) {
  if (a_bar.size() != ops.n_points())
    throw DimensionMismatch("reaction_matrix: nodal vector length mismatch");
  SpMat D(a_bar.size(), a_bar.size());
  D = a_bar.asDiagonal();
  return SpMat(0.5 * (ops.M * D) + 0.5 * (D * ops.M));
}

SpMat convection_matrix(const FemOperators& ops, const Vec& b1_bar, const Vec& b2_bar) {
  if (b1_bar.size() != ops.n_points() || b2_bar.size() != ops.n_points())
    throw DimensionMismatch("convection_matrix: nodal vector length mismatch");
  SpMat D1(b1_bar.size(), b1_bar.size()), D2(b2_bar.size(), b2_bar.size());
  D1 = b1_bar.asDiagonal();
  D2 = b2_bar.asDiagonal();
  return SpMat(ops.G1 * D1 + ops.G2 * D2);
}

Vec solve_elliptic(const FemOperators& ops, double mu, const Vec& beta_r,
                   const Vec& beta_c1, const Vec& beta_c2, const Vec& h,
                   const Vec& g_b) {
  int sp = ops.n_points();
  if (beta_r.size() != sp || beta_c1.size() != sp || beta_c2.size() != sp ||
      h.size() != sp || g_b.size() != ops.n_b)
    throw DimensionMismatch("solve_elliptic: vector length mismatch");
  SpMat A = SpMat(mu * ops.S) + reaction_matrix(ops, beta_r) +
            convection_matrix(ops, beta_c1, beta_c2);
  SpMat A_ii = A.block(0, 0, ops.n_i, ops.n_i);
  SpMat A_ib = A.block(0, ops.n_i, ops.n_i, ops.n_b);
  Vec rhs = -(ops.M * h).head(ops.n_i) - A_ib * g_b;
  Vec v(sp);
  v.head(ops.n_i) = solve_lu(A_ii, rhs);
  v.tail(ops.n_b) = g_b;
  return v;
}

double h_norm_sq(const FemOperators& ops, const Vec& v) {
  if (v.size() != ops.n_points())
    throw DimensionMismatch("h_norm_sq: nodal vector length mismatch");
  return v.dot(ops.M * v);
}

double bochner_norm_sq(const std::vector<double>& h_norms, double k) {
  size_t n = h_norms.size();
  if (n < 2) throw DimensionMismatch("bochner_norm_sq: need at least two samples");
  const std::vector<double>& s = h_norms;
  double acc = 2.0 * (s[0] * s[0] + s[n - 1] * s[n - 1]);
  for (size_t j = 1; j + 1 < n; ++j) acc += 4.0 * s[j] * s[j];
  for (size_t j = 0; j + 1 < n; ++j) acc += 2.0 * s[j] * s[j + 1];
  return k / 6.0 * acc;
}

Vec solve_spd(const SpMat& A, const Vec& rhs) {
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-12);
  cg.setMaxIterations(10 * A.rows());
  cg.compute(A);
  Vec x = cg.solve(rhs);
  if (cg.info() != Eigen::Success)
    throw SingularSystem("conjugate gradient failed to converge");
  return x;
}

Vec solve_lu(const SpMat& A, const Vec& rhs) {
  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SingularSystem("sparse LU factorization failed");
  Vec x = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw SingularSystem("sparse LU solve failed");
  return x;
}

std::string export_triplets(const SpMat& A) {
  std::ostringstream os;
  os.precision(17);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      os << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
  return os.str();
}

}  // namespace parastab
