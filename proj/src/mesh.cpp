#include "parastab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace parastab {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double signed_area(const Point2& a, const Point2& b, const Point2& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

// Edge list and permutation are derivable from points+triangles; this
// finalizes a mesh whose boundary flags are already set.
void finalize(Mesh& m) {
  // Orient all triangles counterclockwise.
  for (auto& t : m.triangles) {
    double a = signed_area(m.points[t[0]], m.points[t[1]], m.points[t[2]]);
    if (a < 0) std::swap(t[1], t[2]);
  }
  // Boundary edges = edges used by exactly one triangle, oriented as in that
  // triangle (so the domain lies on the left, giving a CCW boundary cycle).
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : m.triangles)
    for (int e = 0; e < 3; ++e) {
      int i = t[e], j = t[(e + 1) % 3];
      count[{std::min(i, j), std::max(i, j)}]++;
    }
  m.edges.clear();
  for (const auto& t : m.triangles)
    for (int e = 0; e < 3; ++e) {
      int i = t[e], j = t[(e + 1) % 3];
      if (count[{std::min(i, j), std::max(i, j)}] == 1) m.edges.push_back({i, j});
    }
  // Interior-first permutation, stable within each class.
  m.perm.clear();
  m.inv_perm.assign(m.points.size(), -1);
  for (int i = 0; i < m.n_points(); ++i)
    if (!m.on_boundary[i]) m.perm.push_back(i);
  for (int i = 0; i < m.n_points(); ++i)
    if (m.on_boundary[i]) m.perm.push_back(i);
  for (int i = 0; i < m.n_points(); ++i) m.inv_perm[m.perm[i]] = i;
}

void check_boundary_consistency(const Mesh& m) {
  std::vector<int> degree(m.points.size(), 0);
  for (const auto& e : m.edges) {
    degree[e[0]]++;
    degree[e[1]]++;
  }
  for (int i = 0; i < m.n_points(); ++i) {
    if (m.on_boundary[i] && degree[i] != 2)
      throw MalformedMesh(0, "boundary point " + std::to_string(i + 1) +
                                 " lies on " + std::to_string(degree[i]) +
                                 " boundary edges");
    if (!m.on_boundary[i] && degree[i] != 0)
      throw MalformedMesh(0, "interior point " + std::to_string(i + 1) +
                                 " touches the boundary");
  }
}

}  // namespace

double Mesh::triangle_area(int k) const {
  const auto& t = triangles[k];
  return signed_area(points[t[0]], points[t[1]], points[t[2]]);
}

double Mesh::total_area() const {
  double a = 0;
  for (int k = 0; k < static_cast<int>(triangles.size()); ++k) a += triangle_area(k);
  return a;
}

double Mesh::polygon_area() const {
  double a = 0;
  for (const auto& e : edges) {
    const auto& p = points[e[0]];
    const auto& q = points[e[1]];
    a += 0.5 * (p.x * q.y - q.x * p.y);
  }
  return a;
}

Mesh generate_disk_mesh(int rings) {
  if (rings < 1) throw std::invalid_argument("rings must be >= 1");
  Mesh m;
  m.points.push_back({0, 0});
  m.on_boundary.push_back(false);
  m.theta.push_back(0);
  std::vector<int> ring_start(rings + 1, 0);  // index of first point of ring r
  for (int r = 1; r <= rings; ++r) {
    ring_start[r] = m.n_points();
    int n = 6 * r;
    double rad = double(r) / rings;
    for (int j = 0; j < n; ++j) {
      double th = two_pi * j / n;
      m.points.push_back({rad * std::cos(th), rad * std::sin(th)});
      m.on_boundary.push_back(r == rings);
      m.theta.push_back(th);
    }
  }
  // Fan around the center.
  for (int j = 0; j < 6; ++j)
    m.triangles.push_back({0, ring_start[1] + j, ring_start[1] + (j + 1) % 6});
  // Strip between rings r and r+1: merge the two circular point sequences by
  // fractional angle, advancing whichever side has the smaller next angle.
  for (int r = 1; r < rings; ++r) {
    int n = 6 * r, nn = 6 * (r + 1);
    int si = ring_start[r], so = ring_start[r + 1];
    int i = 0, j = 0;
    while (i < n || j < nn) {
      bool take_inner = (i < n) && (j >= nn || (i + 1) * nn <= (j + 1) * n);
      if (take_inner) {
        m.triangles.push_back({si + i % n, so + j % nn, si + (i + 1) % n});
        ++i;
      } else {
        m.triangles.push_back({so + j % nn, so + (j + 1) % nn, si + i % n});
        ++j;
      }
    }
  }
  finalize(m);
  check_boundary_consistency(m);
  return m;
}

Mesh refine(const Mesh& mesh, bool project_to_circle) {
  Mesh m;
  m.points = mesh.points;
  m.on_boundary = mesh.on_boundary;
  m.theta = mesh.theta;
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int i, int j) {
    auto key = std::make_pair(std::min(i, j), std::max(i, j));
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Point2 p{0.5 * (mesh.points[i].x + mesh.points[j].x),
             0.5 * (mesh.points[i].y + mesh.points[j].y)};
    // An edge midpoint is a boundary point iff the edge is a boundary edge.
    bool bnd = false;
    for (const auto& e : mesh.edges)
      if ((e[0] == i && e[1] == j) || (e[0] == j && e[1] == i)) bnd = true;
    double th = 0;
    if (bnd) {
      double t0 = mesh.theta[i], t1 = mesh.theta[j];
      if (std::abs(t0 - t1) > std::numbers::pi) {
        th = 0.5 * (t0 + t1) + std::numbers::pi;
        if (th >= two_pi) th -= two_pi;
      } else {
        th = 0.5 * (t0 + t1);
      }
      if (project_to_circle) {
        p = {std::cos(th), std::sin(th)};
      }
    }
    int idx = m.n_points();
    m.points.push_back(p);
    m.on_boundary.push_back(bnd);
    m.theta.push_back(th);
    midpoint.emplace(key, idx);
    return idx;
  };
  for (const auto& t : mesh.triangles) {
    int a = t[0], b = t[1], c = t[2];
    int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
    m.triangles.push_back({a, ab, ca});
    m.triangles.push_back({ab, b, bc});
    m.triangles.push_back({ca, bc, c});
    m.triangles.push_back({ab, bc, ca});
  }
  finalize(m);
  check_boundary_consistency(m);
  return m;
}

Mesh load_mesh(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto next_tokens = [&](std::vector<std::string>& out) -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      out.clear();
      std::string tok;
      while (ls >> tok) out.push_back(tok);
      if (!out.empty()) return true;
    }
    return false;
  };

  std::vector<std::string> tok;
  if (!next_tokens(tok) || tok.size() != 2 || tok[0] != "points")
    throw MalformedMesh(lineno, "expected 'points N'");
  int np = 0;
  try {
    np = std::stoi(tok[1]);
  } catch (...) {
    throw MalformedMesh(lineno, "bad point count");
  }
  if (np < 3) throw MalformedMesh(lineno, "need at least 3 points");

  Mesh m;
  for (int i = 0; i < np; ++i) {
    if (!next_tokens(tok)) throw MalformedMesh(lineno, "unexpected end of file in points");
    if (tok.size() != 2 && tok.size() != 3)
      throw MalformedMesh(lineno, "expected 'x y [theta]'");
    try {
      m.points.push_back({std::stod(tok[0]), std::stod(tok[1])});
      m.on_boundary.push_back(tok.size() == 3);
      m.theta.push_back(tok.size() == 3 ? std::stod(tok[2]) : 0.0);
    } catch (...) {
      throw MalformedMesh(lineno, "bad coordinate");
    }
  }

  if (!next_tokens(tok) || tok.size() != 2 || tok[0] != "triangles")
    throw MalformedMesh(lineno, "expected 'triangles M'");
  int nt = 0;
  try {
    nt = std::stoi(tok[1]);
  } catch (...) {
    throw MalformedMesh(lineno, "bad triangle count");
  }
  for (int k = 0; k < nt; ++k) {
    if (!next_tokens(tok)) throw MalformedMesh(lineno, "unexpected end of file in triangles");
    if (tok.size() != 3) throw MalformedMesh(lineno, "expected 'i j k'");
    std::array<int, 3> t{};
    for (int e = 0; e < 3; ++e) {
      try {
        t[e] = std::stoi(tok[e]) - 1;
      } catch (...) {
        throw MalformedMesh(lineno, "bad index");
      }
      if (t[e] < 0 || t[e] >= np)
        throw DanglingIndex("triangle " + std::to_string(k + 1) +
                            " references point " + tok[e]);
    }
    double a = signed_area(m.points[t[0]], m.points[t[1]], m.points[t[2]]);
    if (a == 0) throw NonPositiveArea(k + 1);
    m.triangles.push_back(t);
  }
  finalize(m);
  check_boundary_consistency(m);
  for (int k = 0; k < static_cast<int>(m.triangles.size()); ++k)
    if (m.triangle_area(k) <= 0) throw NonPositiveArea(k + 1);
  return m;
}

std::string save_mesh(const Mesh& mesh) {
  std::ostringstream os;
  os.precision(17);
  os << "points " << mesh.n_points() << "\n";
  for (int i = 0; i < mesh.n_points(); ++i) {
    os << mesh.points[i].x << " " << mesh.points[i].y;
    if (mesh.on_boundary[i]) os << " " << mesh.theta[i];
    os << "\n";
  }
  os << "triangles " << mesh.triangles.size() << "\n";
  for (const auto& t : mesh.triangles)
    os << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
  return os.str();
}

}  // namespace parastab
