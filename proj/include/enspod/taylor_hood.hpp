#pragma once

#include <Eigen/Sparse>
#include <array>
#include <memory>
#include <vector>

#include "enspod/mesh.hpp"

namespace enspod {

using Vec2 = std::array<double, 2>;

/// Quadratic Lagrange basis on a triangle in barycentric coordinates.
/// Local nodes 0..2 are the vertices, 3..5 the midpoints of edges
/// (1,2), (2,0), (0,1).
struct P2Basis {
  static std::array<double, 6> values(const std::array<double, 3>& bary);
  /// Physical gradients given the (constant) barycentric gradients.
  static std::array<Vec2, 6> gradients(const std::array<double, 3>& bary,
                                       const std::array<Vec2, 3>& grad_bary);
};

struct ElementGeometry {
  double area = 0.0;
  std::array<Vec2, 3> grad_bary{};  // gradients of the barycentric coordinates
};

/// Taylor-Hood P2-P1 space over a mesh.
///
/// Scalar P2 nodes are the mesh vertices followed by one node per edge.
/// Velocity dof of (component c, node s) is c * n_nodes + s; pressure dofs
/// are the mesh vertices. Every velocity operator assembled on this space
/// shares one sparsity pattern (velocity_pattern), so operators can be
/// combined value by value.
class TaylorHoodSpace {
 public:
  /// No-slip is imposed on the listed boundary markers (all markers when
  /// the list is empty).
  explicit TaylorHoodSpace(std::shared_ptr<const Mesh> mesh, std::vector<int> no_slip_markers = {});

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }

  int n_nodes() const { return n_nodes_; }
  int n_edges() const { return n_nodes_ - mesh_->n_vertices(); }
  int n_vel() const { return 2 * n_nodes_; }
  int n_pr() const { return mesh_->n_vertices(); }

  int velocity_dof(int component, int node) const { return component * n_nodes_ + node; }

  const std::array<int, 6>& element_nodes(int t) const { return element_nodes_[t]; }
  const std::array<int, 3>& pressure_dofs(int t) const { return mesh_->triangles()[t]; }
  const ElementGeometry& geometry(int t) const { return geometry_[t]; }
  const Point2& node(int s) const { return nodes_[s]; }
  const std::vector<Point2>& nodes() const { return nodes_; }

  /// Map from element-local barycentric coordinates to physical point.
  Point2 map_point(int t, const std::array<double, 3>& bary) const;

  bool is_dirichlet(int dof) const { return dirichlet_mask_[dof] != 0; }
  const std::vector<int>& dirichlet_dofs() const { return dirichlet_dofs_; }

  const Eigen::SparseMatrix<double>& velocity_pattern() const { return pattern_; }
  /// Value slots of the 6x6 scalar element block (row a, column b at
  /// a * 6 + b) in component c's diagonal block of velocity_pattern().
  const std::array<int, 36>& element_slots(int component, int t) const {
    return slots_[component][t];
  }

 private:
  std::shared_ptr<const Mesh> mesh_;
  int n_nodes_ = 0;
  std::vector<std::array<int, 6>> element_nodes_;
  std::vector<ElementGeometry> geometry_;
  std::vector<Point2> nodes_;
  std::vector<char> dirichlet_mask_;
  std::vector<int> dirichlet_dofs_;
  Eigen::SparseMatrix<double> pattern_;
  std::array<std::vector<std::array<int, 36>>, 2> slots_;
};

}  // namespace enspod
