#include "enspod/taylor_hood.hpp"

#include <algorithm>
#include <unordered_map>

#include "enspod/error.hpp"

namespace enspod {

std::array<double, 6> P2Basis::values(const std::array<double, 3>& l) {
  return {l[0] * (2.0 * l[0] - 1.0), l[1] * (2.0 * l[1] - 1.0), l[2] * (2.0 * l[2] - 1.0),
          4.0 * l[1] * l[2],         4.0 * l[2] * l[0],         4.0 * l[0] * l[1]};
}

std::array<Vec2, 6> P2Basis::gradients(const std::array<double, 3>& l,
                                       const std::array<Vec2, 3>& g) {
  std::array<Vec2, 6> out{};
  for (int i = 0; i < 3; ++i) {
    const double s = 4.0 * l[i] - 1.0;
    out[i] = {s * g[i][0], s * g[i][1]};
  }
  auto edge = [&](int a, int b) {
    return Vec2{4.0 * (l[a] * g[b][0] + l[b] * g[a][0]), 4.0 * (l[a] * g[b][1] + l[b] * g[a][1])};
  };
  out[3] = edge(1, 2);
  out[4] = edge(2, 0);
  out[5] = edge(0, 1);
  return out;
}

TaylorHoodSpace::TaylorHoodSpace(std::shared_ptr<const Mesh> mesh, std::vector<int> no_slip_markers)
    : mesh_(std::move(mesh)) {
  if (!mesh_) throw InvalidArgument("TaylorHoodSpace needs a mesh");
  const auto& verts = mesh_->vertices();
  const auto& tris = mesh_->triangles();
  const int nv = mesh_->n_vertices();

  nodes_ = verts;
  std::unordered_map<std::uint64_t, int> edge_node;
  edge_node.reserve(tris.size() * 2);
  auto node_for_edge = [&](int a, int b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    auto [it, inserted] = edge_node.try_emplace((lo << 32) | hi, 0);
    if (inserted) {
      it->second = static_cast<int>(nodes_.size());
      nodes_.push_back({0.5 * (verts[a].x + verts[b].x), 0.5 * (verts[a].y + verts[b].y)});
    }
    return it->second;
  };

  element_nodes_.resize(tris.size());
  geometry_.resize(tris.size());
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& tri = tris[t];
    element_nodes_[t] = {tri[0], tri[1], tri[2], node_for_edge(tri[1], tri[2]),
                         node_for_edge(tri[2], tri[0]), node_for_edge(tri[0], tri[1])};
    const Point2& p0 = verts[tri[0]];
    const Point2& p1 = verts[tri[1]];
    const Point2& p2 = verts[tri[2]];
    const double twice_area = (p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x);
    ElementGeometry& geo = geometry_[t];
    geo.area = 0.5 * twice_area;
    geo.grad_bary[0] = {(p1.y - p2.y) / twice_area, (p2.x - p1.x) / twice_area};
    geo.grad_bary[1] = {(p2.y - p0.y) / twice_area, (p0.x - p2.x) / twice_area};
    geo.grad_bary[2] = {(p0.y - p1.y) / twice_area, (p1.x - p0.x) / twice_area};
  }
  n_nodes_ = static_cast<int>(nodes_.size());
  (void)nv;

  dirichlet_mask_.assign(static_cast<std::size_t>(n_vel()), 0);
  auto marked = [&](int marker) {
    return no_slip_markers.empty() ||
           std::find(no_slip_markers.begin(), no_slip_markers.end(), marker) != no_slip_markers.end();
  };
  for (const auto& e : mesh_->boundary_edges()) {
    if (!marked(e.marker)) continue;
    for (int s : {e.a, e.b, node_for_edge(e.a, e.b)}) {
      dirichlet_mask_[velocity_dof(0, s)] = 1;
      dirichlet_mask_[velocity_dof(1, s)] = 1;
    }
  }
  for (int d = 0; d < n_vel(); ++d) {
    if (dirichlet_mask_[d]) dirichlet_dofs_.push_back(d);
  }

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(tris.size() * 72);
  for (std::size_t t = 0; t < tris.size(); ++t) {
    for (int c = 0; c < 2; ++c) {
      for (int a = 0; a < 6; ++a) {
        for (int b = 0; b < 6; ++b) {
          entries.emplace_back(velocity_dof(c, element_nodes_[t][a]),
                               velocity_dof(c, element_nodes_[t][b]), 0.0);
        }
      }
    }
  }
  pattern_.resize(n_vel(), n_vel());
  pattern_.setFromTriplets(entries.begin(), entries.end());
  pattern_.makeCompressed();

  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  for (int c = 0; c < 2; ++c) {
    slots_[c].resize(tris.size());
    for (std::size_t t = 0; t < tris.size(); ++t) {
      for (int a = 0; a < 6; ++a) {
        const int row = velocity_dof(c, element_nodes_[t][a]);
        for (int b = 0; b < 6; ++b) {
          const int col = velocity_dof(c, element_nodes_[t][b]);
          const int* pos = std::lower_bound(inner + outer[col], inner + outer[col + 1], row);
          slots_[c][t][a * 6 + b] = static_cast<int>(pos - inner);
        }
      }
    }
  }
}

Point2 TaylorHoodSpace::map_point(int t, const std::array<double, 3>& bary) const {
  const auto& tri = mesh_->triangles()[t];
  const auto& v = mesh_->vertices();
  return {bary[0] * v[tri[0]].x + bary[1] * v[tri[1]].x + bary[2] * v[tri[2]].x,
          bary[0] * v[tri[0]].y + bary[1] * v[tri[1]].y + bary[2] * v[tri[2]].y};
}

}  // namespace enspod
