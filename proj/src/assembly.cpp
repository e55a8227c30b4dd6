#include "enspod/assembly.hpp"

#include <cmath>

#include "enspod/error.hpp"
#include "enspod/quadrature.hpp"

namespace enspod {

namespace {

using ElementBlock = std::array<double, 36>;

// Tabulated P2 values at the points of a rule.
struct Tabulation {
  std::vector<std::array<double, 6>> values;
  explicit Tabulation(const QuadratureRule& rule) {
    for (const auto& p : rule.points) values.push_back(P2Basis::values(p));
  }
};

const Tabulation& degree5_table() {
  static const Tabulation table(symmetric_degree5());
  return table;
}

const QuadratureRule& high_order_rule() {
  static const QuadratureRule rule = collapsed_gauss(8);
  return rule;
}

void check_length(const TaylorHoodSpace& space, const Coefficients& u, const char* name) {
  if (u.size() != space.n_vel()) {
    throw InvalidArgument(std::string(name) + " has length " + std::to_string(u.size()) +
                          ", expected " + std::to_string(space.n_vel()));
  }
}

// Scatters the same scalar element block into both component blocks.
template <typename LocalBlock>
SparseOperator assemble_block_diagonal(const TaylorHoodSpace& space, LocalBlock&& local,
                                       bool symmetric) {
  SparseOperator op;
  op.matrix = space.velocity_pattern();
  op.symmetric = symmetric;
  double* values = op.matrix.valuePtr();
  std::fill(values, values + op.matrix.nonZeros(), 0.0);
  for (int t = 0; t < space.mesh().n_triangles(); ++t) {
    const ElementBlock block = local(t);
    for (int c = 0; c < 2; ++c) {
      const auto& slots = space.element_slots(c, t);
      for (int k = 0; k < 36; ++k) values[slots[k]] += block[k];
    }
  }
  return op;
}

// X_ab = (w . grad phi_b, phi_a) and, optionally, D_ab = ((div w) phi_b, phi_a).
void advective_blocks(const TaylorHoodSpace& space, const Coefficients& w, int t,
                      ElementBlock& advect, ElementBlock* divergence) {
  const auto& rule = symmetric_degree5();
  const auto& table = degree5_table();
  const auto& geo = space.geometry(t);
  advect.fill(0.0);
  if (divergence) divergence->fill(0.0);
  for (int q = 0; q < rule.size(); ++q) {
    const auto grads = P2Basis::gradients(rule.points[q], geo.grad_bary);
    const auto& phi = table.values[q];
    const PointValue wq = evaluate(space, w, t, rule.points[q]);
    const double weight = geo.area * rule.weights[q];
    std::array<double, 6> w_dot_grad{};
    for (int b = 0; b < 6; ++b) w_dot_grad[b] = wq.value[0] * grads[b][0] + wq.value[1] * grads[b][1];
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) advect[a * 6 + b] += weight * w_dot_grad[b] * phi[a];
    }
    if (divergence) {
      const double div_w = wq.grad[0][0] + wq.grad[1][1];
      for (int a = 0; a < 6; ++a) {
        for (int b = 0; b < 6; ++b) (*divergence)[a * 6 + b] += weight * div_w * phi[a] * phi[b];
      }
    }
  }
}

}  // namespace

PointValue evaluate(const TaylorHoodSpace& space, const Coefficients& u, int t,
                    const std::array<double, 3>& bary) {
  const auto& nodes = space.element_nodes(t);
  const auto phi = P2Basis::values(bary);
  const auto grads = P2Basis::gradients(bary, space.geometry(t).grad_bary);
  const int n = space.n_nodes();
  PointValue out;
  for (int a = 0; a < 6; ++a) {
    for (int c = 0; c < 2; ++c) {
      const double coef = u[c * n + nodes[a]];
      out.value[c] += coef * phi[a];
      out.grad[c][0] += coef * grads[a][0];
      out.grad[c][1] += coef * grads[a][1];
    }
  }
  return out;
}

SparseOperator assemble_mass(const TaylorHoodSpace& space) {
  const auto& rule = symmetric_degree5();
  const auto& table = degree5_table();
  return assemble_block_diagonal(
      space,
      [&](int t) {
        ElementBlock block{};
        const double area = space.geometry(t).area;
        for (int q = 0; q < rule.size(); ++q) {
          const auto& phi = table.values[q];
          for (int a = 0; a < 6; ++a) {
            for (int b = 0; b < 6; ++b) block[a * 6 + b] += area * rule.weights[q] * phi[a] * phi[b];
          }
        }
        return block;
      },
      true);
}

SparseOperator assemble_stiffness(const TaylorHoodSpace& space) {
  const auto& rule = symmetric_degree5();
  return assemble_block_diagonal(
      space,
      [&](int t) {
        ElementBlock block{};
        const auto& geo = space.geometry(t);
        for (int q = 0; q < rule.size(); ++q) {
          const auto g = P2Basis::gradients(rule.points[q], geo.grad_bary);
          for (int a = 0; a < 6; ++a) {
            for (int b = 0; b < 6; ++b) {
              block[a * 6 + b] += geo.area * rule.weights[q] * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
            }
          }
        }
        return block;
      },
      true);
}

SparseOperator assemble_divergence(const TaylorHoodSpace& space) {
  const auto& rule = symmetric_degree5();
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(space.mesh().n_triangles()) * 36);
  for (int t = 0; t < space.mesh().n_triangles(); ++t) {
    const auto& geo = space.geometry(t);
    const auto& nodes = space.element_nodes(t);
    const auto& pdofs = space.pressure_dofs(t);
    double local[3][2][6] = {};
    for (int q = 0; q < rule.size(); ++q) {
      const auto& l = rule.points[q];
      const auto g = P2Basis::gradients(l, geo.grad_bary);
      const double weight = geo.area * rule.weights[q];
      for (int k = 0; k < 3; ++k) {
        for (int c = 0; c < 2; ++c) {
          for (int a = 0; a < 6; ++a) local[k][c][a] += weight * l[k] * g[a][c];
        }
      }
    }
    for (int k = 0; k < 3; ++k) {
      for (int c = 0; c < 2; ++c) {
        for (int a = 0; a < 6; ++a) {
          entries.emplace_back(pdofs[k], space.velocity_dof(c, nodes[a]), local[k][c][a]);
        }
      }
    }
  }
  SparseOperator op;
  op.matrix.resize(space.n_pr(), space.n_vel());
  op.matrix.setFromTriplets(entries.begin(), entries.end());
  op.matrix.makeCompressed();
  return op;
}

SparseOperator assemble_convection(const TaylorHoodSpace& space, const Coefficients& w) {
  check_length(space, w, "convecting field");
  return assemble_block_diagonal(
      space,
      [&](int t) {
        ElementBlock x{};
        advective_blocks(space, w, t, x, nullptr);
        ElementBlock block{};
        for (int a = 0; a < 6; ++a) {
          block[a * 6 + a] = 0.0;
          for (int b = a + 1; b < 6; ++b) {
            const double skew = 0.5 * (x[a * 6 + b] - x[b * 6 + a]);
            block[a * 6 + b] = skew;
            block[b * 6 + a] = -skew;
          }
        }
        return block;
      },
      false);
}

SparseOperator assemble_convection_divergence_form(const TaylorHoodSpace& space,
                                                   const Coefficients& w) {
  check_length(space, w, "convecting field");
  return assemble_block_diagonal(
      space,
      [&](int t) {
        ElementBlock x{}, d{};
        advective_blocks(space, w, t, x, &d);
        ElementBlock block{};
        for (int k = 0; k < 36; ++k) block[k] = x[k] + 0.5 * d[k];
        return block;
      },
      false);
}

Coefficients convection_action(const TaylorHoodSpace& space, const Coefficients& w,
                               const Coefficients& u) {
  check_length(space, w, "convecting field");
  check_length(space, u, "convected field");
  const auto& rule = symmetric_degree5();
  const auto& table = degree5_table();
  const int n = space.n_nodes();
  Coefficients out = Coefficients::Zero(space.n_vel());
  for (int t = 0; t < space.mesh().n_triangles(); ++t) {
    const auto& geo = space.geometry(t);
    const auto& nodes = space.element_nodes(t);
    for (int q = 0; q < rule.size(); ++q) {
      const auto g = P2Basis::gradients(rule.points[q], geo.grad_bary);
      const auto& phi = table.values[q];
      const PointValue wq = evaluate(space, w, t, rule.points[q]);
      const PointValue uq = evaluate(space, u, t, rule.points[q]);
      const double weight = 0.5 * geo.area * rule.weights[q];
      for (int c = 0; c < 2; ++c) {
        const double w_grad_u = wq.value[0] * uq.grad[c][0] + wq.value[1] * uq.grad[c][1];
        for (int a = 0; a < 6; ++a) {
          const double w_grad_phi = wq.value[0] * g[a][0] + wq.value[1] * g[a][1];
          out[c * n + nodes[a]] += weight * (w_grad_u * phi[a] - w_grad_phi * uq.value[c]);
        }
      }
    }
  }
  return out;
}

double trilinear(const TaylorHoodSpace& space, const Coefficients& w, const Coefficients& u,
                 const Coefficients& v) {
  check_length(space, w, "w");
  check_length(space, u, "u");
  check_length(space, v, "v");
  const auto& rule = symmetric_degree5();
  double total = 0.0;
  for (int t = 0; t < space.mesh().n_triangles(); ++t) {
    const double area = space.geometry(t).area;
    for (int q = 0; q < rule.size(); ++q) {
      const PointValue wq = evaluate(space, w, t, rule.points[q]);
      const PointValue uq = evaluate(space, u, t, rule.points[q]);
      const PointValue vq = evaluate(space, v, t, rule.points[q]);
      double integrand = 0.0;
      for (int c = 0; c < 2; ++c) {
        const double w_grad_u = wq.value[0] * uq.grad[c][0] + wq.value[1] * uq.grad[c][1];
        const double w_grad_v = wq.value[0] * vq.grad[c][0] + wq.value[1] * vq.grad[c][1];
        integrand += w_grad_u * vq.value[c] - w_grad_v * uq.value[c];
      }
      total += 0.5 * area * rule.weights[q] * integrand;
    }
  }
  return total;
}

Coefficients interpolate(const TaylorHoodSpace& space, const VectorFunction& f) {
  Coefficients out(space.n_vel());
  for (int s = 0; s < space.n_nodes(); ++s) {
    const Vec2 value = f(space.node(s));
    out[space.velocity_dof(0, s)] = value[0];
    out[space.velocity_dof(1, s)] = value[1];
  }
  return out;
}

Coefficients load_vector(const TaylorHoodSpace& space, const VectorFunction& f) {
  const auto& rule = symmetric_degree5();
  const auto& table = degree5_table();
  const int n = space.n_nodes();
  Coefficients out = Coefficients::Zero(space.n_vel());
  for (int t = 0; t < space.mesh().n_triangles(); ++t) {
    const double area = space.geometry(t).area;
    const auto& nodes = space.element_nodes(t);
    for (int q = 0; q < rule.size(); ++q) {
      const Vec2 fq = f(space.map_point(t, rule.points[q]));
      const double weight = area * rule.weights[q];
      for (int a = 0; a < 6; ++a) {
        out[nodes[a]] += weight * fq[0] * table.values[q][a];
        out[n + nodes[a]] += weight * fq[1] * table.values[q][a];
      }
    }
  }
  return out;
}

FieldNorms norms(const TaylorHoodSpace& space, const Coefficients& u) {
  check_length(space, u, "field");
  const auto& rule = symmetric_degree5();
  const auto& high = high_order_rule();
  double l2 = 0.0, h1 = 0.0, l3 = 0.0, l6 = 0.0;
  for (int t = 0; t < space.mesh().n_triangles(); ++t) {
    const double area = space.geometry(t).area;
    for (int q = 0; q < rule.size(); ++q) {
      const PointValue uq = evaluate(space, u, t, rule.points[q]);
      const double weight = area * rule.weights[q];
      l2 += weight * (uq.value[0] * uq.value[0] + uq.value[1] * uq.value[1]);
      for (int c = 0; c < 2; ++c) h1 += weight * (uq.grad[c][0] * uq.grad[c][0] + uq.grad[c][1] * uq.grad[c][1]);
    }
    for (int q = 0; q < high.size(); ++q) {
      const PointValue uq = evaluate(space, u, t, high.points[q]);
      const double weight = area * high.weights[q];
      const double sq = uq.value[0] * uq.value[0] + uq.value[1] * uq.value[1];
      l3 += weight * sq * std::sqrt(sq);
      l6 += weight * sq * sq * sq;
    }
  }
  return {std::sqrt(l2), std::sqrt(h1), std::cbrt(l3), std::pow(l6, 1.0 / 6.0)};
}

double curl_norm_squared(const TaylorHoodSpace& space, const Coefficients& u) {
  check_length(space, u, "field");
  const auto& rule = symmetric_degree5();
  double total = 0.0;
  for (int t = 0; t < space.mesh().n_triangles(); ++t) {
    const double area = space.geometry(t).area;
    for (int q = 0; q < rule.size(); ++q) {
      const PointValue uq = evaluate(space, u, t, rule.points[q]);
      const double curl = uq.grad[1][0] - uq.grad[0][1];
      total += area * rule.weights[q] * curl * curl;
    }
  }
  return total;
}

double l2_error(const TaylorHoodSpace& space, const Coefficients& u, const VectorFunction& exact) {
  check_length(space, u, "field");
  const auto& high = high_order_rule();
  double total = 0.0;
  for (int t = 0; t < space.mesh().n_triangles(); ++t) {
    const double area = space.geometry(t).area;
    for (int q = 0; q < high.size(); ++q) {
      const PointValue uq = evaluate(space, u, t, high.points[q]);
      const Vec2 e = exact(space.map_point(t, high.points[q]));
      const double dx = uq.value[0] - e[0];
      const double dy = uq.value[1] - e[1];
      total += area * high.weights[q] * (dx * dx + dy * dy);
    }
  }
  return std::sqrt(total);
}

}  // namespace enspod
