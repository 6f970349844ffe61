#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace parastab {

struct Point2 {
  double x = 0, y = 0;
};

// Triangulation of the polygonal approximation of the unit disk.
// Boundary points carry an arc parameter theta in [0, 2*pi). The permutation
// `perm` renumbers nodes interior-first: perm[new_index] = old_index, keeping
// the relative order inside the interior and boundary sets.
struct Mesh {
  std::vector<Point2> points;
  std::vector<bool> on_boundary;
  std::vector<double> theta;                     // valid where on_boundary
  std::vector<std::array<int, 2>> edges;         // boundary segments, ordered
  std::vector<std::array<int, 3>> triangles;     // counterclockwise
  std::vector<int> perm;                         // new -> old
  std::vector<int> inv_perm;                     // old -> new

  int n_points() const { return static_cast<int>(points.size()); }
  int n_boundary() const { return static_cast<int>(edges.size()); }
  int n_interior() const { return n_points() - n_boundary(); }

  double triangle_area(int k) const;
  double total_area() const;
  double polygon_area() const;  // shoelace over the boundary cycle
};

struct MalformedMesh : std::runtime_error {
  int line;
  MalformedMesh(int line_, const std::string& reason)
      : std::runtime_error("malformed mesh at line " + std::to_string(line_) + ": " + reason),
        line(line_) {}
};

struct DanglingIndex : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonPositiveArea : std::runtime_error {
  int triangle;
  explicit NonPositiveArea(int tri)
      : std::runtime_error("triangle " + std::to_string(tri) + " has nonpositive area"),
        triangle(tri) {}
};

// Concentric-ring triangulation: ring r (1..rings) at radius r/rings carries
// 6r equally spaced points; one center point; the outermost ring is the boundary.
Mesh generate_disk_mesh(int rings);

// Regular refinement: each triangle split into 4 via edge midpoints. Boundary
// midpoints stay on the polygon unless project_to_circle is set.
Mesh refine(const Mesh& mesh, bool project_to_circle = false);

// Text format: `points N`, N lines `x y [theta]`, `triangles M`, M lines `i j k`
// (1-based); `#` starts a comment.
Mesh load_mesh(const std::string& text);

std::string save_mesh(const Mesh& mesh);

}  // namespace parastab
