#include <doctest.h>

#include <cmath>
#include <sstream>

#include "enspod/error.hpp"
#include "enspod/experiment.hpp"
#include "enspod/mesh.hpp"

using namespace enspod;

TEST_SUITE("mesh") {

TEST_CASE("structured square counts") {
  const Mesh m1 = build_structured_square(1);
  CHECK(m1.n_triangles() == 2);
  CHECK(m1.n_vertices() == 4);
  CHECK(m1.boundary_edges().size() == 4);
  CHECK(mesh_size(m1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

  const Mesh m2 = build_structured_square(2);
  CHECK(m2.n_triangles() == 8);
  CHECK(m2.n_vertices() == 9);
  CHECK(mesh_size(m2) == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-15));
}

TEST_CASE("structured square partitions the area") {
  const Mesh m = build_structured_square(4);
  double total = 0.0;
  for (int t = 0; t < m.n_triangles(); ++t) {
    CHECK(m.signed_area(t) > 0.0);
    total += m.signed_area(t);
  }
  CHECK(std::abs(total - 1.0) <= 1e-14);
  CHECK(m.n_markers() == 1);
}

TEST_CASE("diagonal runs from lower left to upper right") {
  const Mesh m = build_structured_square(1);
  bool found = false;
  for (const auto& t : m.triangles()) {
    for (int i = 0; i < 3; ++i) {
      const Point2 a = m.vertices()[t[i]], b = m.vertices()[t[(i + 1) % 3]];
      if ((a == Point2{0, 0} && b == Point2{1, 1}) || (a == Point2{1, 1} && b == Point2{0, 0})) found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("n = 0 is rejected") { CHECK_THROWS_AS(build_structured_square(0), InvalidArgument); }

TEST_CASE("clockwise triangles are reoriented") {
  const Mesh m({{0, 0}, {1, 0}, {0, 1}}, {{0, 2, 1}});
  CHECK(m.signed_area(0) == doctest::Approx(0.5));
}

TEST_CASE("degenerate and out of range triangles are rejected") {
  CHECK_THROWS_AS(Mesh({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}), ValidationError);
  CHECK_THROWS_AS(Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 3}}), ValidationError);
}

TEST_CASE("hanging node is a validation error") {
  // Triangle (0,1,2) keeps the full diagonal while the other half is split at its midpoint.
  const std::vector<Point2> v{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  CHECK_THROWS_AS(Mesh(v, {{0, 1, 2}, {0, 4, 3}, {4, 2, 3}}), ValidationError);
}

TEST_CASE("edge shared by three triangles is a validation error") {
  const std::vector<Point2> v{{0, 0}, {1, 0}, {0.5, 1}, {0.5, -1}, {0.5, 2}};
  CHECK_THROWS_AS(Mesh(v, {{0, 1, 2}, {0, 3, 1}, {0, 1, 4}}), ValidationError);
}

TEST_CASE("parse errors carry line numbers") {
  std::istringstream bad_index("msh2d 1\nvertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 5\n");
  try {
    parse_mesh(bad_index);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 7);
  }
  std::istringstream bad_header("msh3d 1\n");
  CHECK_THROWS_AS(parse_mesh(bad_header), ParseError);
  std::istringstream bad_number("msh2d 1\nvertices 1\n0 zero\n");
  try {
    parse_mesh(bad_number);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("explicit boundary section must match the topological boundary") {
  std::istringstream missing("msh2d 1\nvertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 2\nboundary 1\n0 1 1\n");
  CHECK_THROWS_AS(parse_mesh(missing), ValidationError);
  std::istringstream full(
      "msh2d 1\nvertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 2\nboundary 3\n0 1 1\n1 2 2\n2 0 1\n");
  const Mesh m = parse_mesh(full);
  CHECK(m.n_markers() == 2);
}

TEST_CASE("save and load round trip is bit exact") {
  const Mesh m = refine_uniform(build_structured_square(3, {-0.3, 0.7, 0.1, 1.3}));
  std::stringstream buffer;
  write_mesh(m, buffer);
  const Mesh back = parse_mesh(buffer);
  CHECK(back == m);
}

TEST_CASE("refinement does not increase h") {
  const Mesh coarse = build_structured_square(3);
  const Mesh fine = refine_uniform(coarse);
  CHECK(mesh_size(fine) <= mesh_size(coarse));
  CHECK(fine.n_triangles() == 4 * coarse.n_triangles());
  CHECK(std::abs(fine.area() - coarse.area()) <= 1e-14);
}

TEST_CASE("bundled offset circles mesh") {
  const auto mesh = make_mesh("offset_circles_coarse.msh2d");
  CHECK(mesh->n_markers() == 2);
  for (int t = 0; t < mesh->n_triangles(); ++t) CHECK(mesh->signed_area(t) > 0.0);

  // Marker 1 is the longer component: the outer circle.
  double outer_dev = 0.0, inner_dev = 0.0;
  double boundary_area = 0.0;  // shoelace over the oriented boundary polygons
  for (const auto& e : mesh->boundary_edges()) {
    const Point2 a = mesh->vertices()[e.a], b = mesh->vertices()[e.b];
    for (const Point2& p : {a, b}) {
      if (e.marker == 1) outer_dev = std::max(outer_dev, std::abs(std::hypot(p.x, p.y) - 1.0));
      if (e.marker == 2) inner_dev = std::max(inner_dev, std::abs(std::hypot(p.x - 0.5, p.y) - 0.1));
    }
    boundary_area += 0.5 * (a.x * b.y - b.x * a.y);
  }
  CHECK(outer_dev <= 1e-12);
  CHECK(inner_dev <= 1e-12);
  CHECK(std::abs(mesh->area() - std::abs(boundary_area)) <= 1e-12 * mesh->area());

  std::stringstream buffer;
  write_mesh(*mesh, buffer);
  CHECK(parse_mesh(buffer) == *mesh);
}

}
