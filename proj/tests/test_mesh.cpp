#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "parastab/mesh.hpp"

using namespace parastab;

TEST_CASE("one-ring disk mesh is the regular hexagon") {
  const Mesh m = generate_disk_mesh(1);
  CHECK(m.points.size() == 7);
  CHECK(m.triangles.size() == 6);
  CHECK(m.n_boundary() == 6);
  CHECK(m.total_area() == doctest::Approx(1.5 * std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("ring meshes approximate the disk and orient consistently") {
  for (int rings : {2, 3, 4}) {
    const Mesh m = generate_disk_mesh(rings);
    // inscribed regular 6r-gon area
    const int sides = 6 * rings;
    const double polygon = 0.5 * sides * std::sin(2 * M_PI / sides);
    CHECK(m.total_area() == doctest::Approx(polygon).epsilon(1e-12));
    CHECK(m.polygon_area() == doctest::Approx(polygon).epsilon(1e-12));
    CHECK(m.n_boundary() == sides);
    for (std::size_t k = 0; k < m.triangles.size(); ++k)
      CHECK(m.triangle_area(static_cast<int>(k)) > 0);
    // interior-first permutation: interior nodes first, boundary nodes last
    for (int idx = 0; idx < m.n_points(); ++idx)
      CHECK(m.on_boundary[m.perm[idx]] == (idx >= m.n_interior()));
    for (int idx = 0; idx < m.n_points(); ++idx) CHECK(m.inv_perm[m.perm[idx]] == idx);
  }
}

TEST_CASE("refinement preserves polygon area; projection recovers the finer polygon") {
  const Mesh coarse = generate_disk_mesh(2);
  const Mesh fine = refine(coarse, false);
  CHECK(fine.total_area() == doctest::Approx(coarse.total_area()).epsilon(1e-12));
  CHECK(fine.triangles.size() == 4 * coarse.triangles.size());

  const Mesh projected = refine(coarse, true);
  const int sides = 24;  // boundary nodes double and land on the circle
  const double polygon = 0.5 * sides * std::sin(2 * M_PI / sides);
  CHECK(projected.total_area() == doctest::Approx(polygon).epsilon(1e-12));
  CHECK(projected.n_boundary() == sides);
}

TEST_CASE("save/load round-trip is exact") {
  const Mesh m = generate_disk_mesh(2);
  const Mesh r = load_mesh(save_mesh(m));
  REQUIRE(r.points.size() == m.points.size());
  REQUIRE(r.triangles.size() == m.triangles.size());
  for (std::size_t i = 0; i < m.points.size(); ++i) {
    CHECK(r.points[i].x == m.points[i].x);
    CHECK(r.points[i].y == m.points[i].y);
  }
  CHECK(r.total_area() == m.total_area());
}

TEST_CASE("malformed mesh text raises typed errors") {
  CHECK_THROWS_AS(load_mesh("points 3\n0 0\n1 0\n0 1\ntriangles 1\n1 2 5\n"),
                  DanglingIndex);
  CHECK_THROWS_AS(load_mesh("points x\n"), MalformedMesh);
  CHECK_THROWS_AS(load_mesh("points 3\n0 0\n1 0\n2 0\ntriangles 1\n1 2 3\n"),
                  NonPositiveArea);
}

TEST_CASE("boundary nodes carry matching arc angles") {
  const Mesh m = generate_disk_mesh(3);
  std::set<double> thetas;
  for (int i = 0; i < m.n_points(); ++i) {
    if (!m.on_boundary[i]) continue;
    const double th = m.theta[i];
    CHECK(th >= 0.0);
    CHECK(th < 2 * M_PI);
    CHECK(std::abs(std::cos(th) - m.points[i].x) < 1e-12);
    CHECK(std::abs(std::sin(th) - m.points[i].y) < 1e-12);
    thetas.insert(th);
  }
  CHECK(static_cast<int>(thetas.size()) == m.n_boundary());
}
