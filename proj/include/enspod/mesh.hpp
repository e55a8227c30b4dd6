#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace enspod {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Boundary edge (a, b) oriented as in its owning triangle, so the domain
/// lies to the left.
struct BoundaryEdge {
  int a = 0;
  int b = 0;
  int marker = 0;
  friend bool operator==(const BoundaryEdge&, const BoundaryEdge&) = default;
};

struct Rect {
  double x0 = 0.0;
  double x1 = 1.0;
  double y0 = 0.0;
  double y1 = 1.0;
};

using Triangle = std::array<int, 3>;

/// Conforming triangle mesh. Immutable after construction.
///
/// The constructor orients every triangle counterclockwise and validates
/// index ranges and conformity. When `boundary` is empty the boundary edges
/// (edges owned by exactly one triangle) are detected and given markers
/// 1..k by connected component, longest component first. When it is given
/// it must list exactly the topological boundary edges.
class Mesh {
 public:
  Mesh(std::vector<Point2> vertices, std::vector<Triangle> triangles,
       std::vector<BoundaryEdge> boundary = {});

  const std::vector<Point2>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }

  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_triangles() const { return static_cast<int>(triangles_.size()); }

  /// Number of distinct boundary markers.
  int n_markers() const { return n_markers_; }

  /// Longest edge over all triangles.
  double h() const { return h_; }

  double area() const;
  double signed_area(int triangle) const;

  friend bool operator==(const Mesh&, const Mesh&) = default;

 private:
  std::vector<Point2> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryEdge> boundary_;
  int n_markers_ = 0;
  double h_ = 0.0;
};

/// n x n cells, each split along the lower-left to upper-right diagonal.
Mesh build_structured_square(int n, Rect extent = {});

/// Red refinement: every triangle split into four through edge midpoints.
Mesh refine_uniform(const Mesh& mesh);

double mesh_size(const Mesh& mesh);

/// `.msh2d` text format.
Mesh parse_mesh(std::istream& in);
Mesh load_mesh(const std::filesystem::path& path);
void write_mesh(const Mesh& mesh, std::ostream& out);
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);

}  // namespace enspod
