#include <doctest.h>

#include <cmath>
#include <numbers>

#include "enspod/assembly.hpp"
#include "enspod/error.hpp"
#include "enspod/experiment.hpp"
#include "enspod/forces.hpp"
#include "enspod/quadrature.hpp"
#include "enspod/saddle_point.hpp"
#include "support.hpp"

using namespace enspod;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Reference-triangle P2 shape functions written out in (x, y).
std::array<double, 6> p2_reference(double x, double y) {
  const double l0 = 1.0 - x - y, l1 = x, l2 = y;
  return {l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1), 4 * l1 * l2, 4 * l2 * l0, 4 * l0 * l1};
}

double max_abs(const Eigen::SparseMatrix<double>& m) {
  double out = 0.0;
  for (int k = 0; k < m.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) out = std::max(out, std::abs(it.value()));
  }
  return out;
}

}  // namespace

TEST_SUITE("fem") {

TEST_CASE("quadrature exactness") {
  for (const QuadratureRule& rule : {symmetric_degree5(), collapsed_gauss(4)}) {
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    CHECK(std::abs(wsum - 1.0) <= 1e-15);
    for (int a = 0; a <= 5; ++a) {
      for (int b = 0; a + b <= 5; ++b) {
        double q = 0.0;
        for (int i = 0; i < rule.size(); ++i) {
          q += 0.5 * rule.weights[i] * std::pow(rule.points[i][1], a) * std::pow(rule.points[i][2], b);
        }
        const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
        CHECK(std::abs(q - exact) <= 1e-13 * exact);
      }
    }
  }
}

TEST_CASE("space dof counts") {
  const TaylorHoodSpace space(testing::square(3));
  const int nv = 16, ne = 3 * 9 + 2 * 3;
  CHECK(space.n_pr() == nv);
  CHECK(space.n_vel() == 2 * (nv + ne));
  // All boundary nodes: 12 vertices and 12 edge midpoints, both components.
  CHECK(space.dirichlet_dofs().size() == 48);
}

TEST_CASE("reference element mass matrix") {
  const TaylorHoodSpace space(testing::single_triangle());
  const SparseOperator m = assemble_mass(space);

  Eigen::Matrix<double, 6, 6> closed;
  for (int a = 0; a < 6; ++a) {
    for (int b = 0; b < 6; ++b) {
      double v;
      if (a < 3 && b < 3) v = a == b ? 6 : -1;
      else if (a >= 3 && b >= 3) v = a == b ? 32 : 16;
      else {
        const int vert = a < 3 ? a : b, mid = a < 3 ? b : a;
        v = mid - 3 == vert ? -4 : 0;
      }
      closed(a, b) = v * 0.5 / 180.0;
    }
  }
  const QuadratureRule rule = collapsed_gauss(6);
  Eigen::Matrix<double, 6, 6> quad = Eigen::Matrix<double, 6, 6>::Zero();
  for (int q = 0; q < rule.size(); ++q) {
    const auto phi = p2_reference(rule.points[q][1], rule.points[q][2]);
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b) quad(a, b) += 0.5 * rule.weights[q] * phi[a] * phi[b];
  }
  CHECK((closed - quad).cwiseAbs().maxCoeff() <= 1e-15);

  const auto& nodes = space.element_nodes(0);
  for (int c = 0; c < 2; ++c) {
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) {
        const double v = m.matrix.coeff(space.velocity_dof(c, nodes[a]), space.velocity_dof(c, nodes[b]));
        CHECK(std::abs(v - quad(a, b)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("mass matrix partition of unity and SPD") {
  const TaylorHoodSpace space(testing::square(4));
  const SparseOperator m = assemble_mass(space);
  CHECK(m.symmetric);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(space.n_vel());
  CHECK(std::abs(ones.dot(m.matrix * ones) - 2.0) <= 1e-10);

  const Eigen::VectorXd rows = m.matrix * ones;
  const Eigen::VectorXd integrals =
      load_vector(space, [](const Point2&) { return Vec2{1.0, 0.0}; }) +
      load_vector(space, [](const Point2&) { return Vec2{0.0, 1.0}; });
  CHECK((rows - integrals).cwiseAbs().maxCoeff() <= 1e-14);

  testing::Fields f;
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd x = f.any(space);
    CHECK(x.dot(m.matrix * x) > 0.0);
  }
  const Eigen::SparseMatrix<double> asym = m.matrix - Eigen::SparseMatrix<double>(m.matrix.transpose());
  CHECK(max_abs(asym) <= 1e-13 * max_abs(m.matrix));
}

TEST_CASE("stiffness matrix") {
  const TaylorHoodSpace space(testing::square(4));
  const SparseOperator a = assemble_stiffness(space);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(space.n_vel());
  c.head(space.n_nodes()).setConstant(1.5);
  c.tail(space.n_nodes()).setConstant(-0.5);
  CHECK((a.matrix * c).cwiseAbs().maxCoeff() <= 1e-11);

  const Eigen::VectorXd u = interpolate(space, [](const Point2& p) { return Vec2{p.x, 0.0}; });
  CHECK(std::abs(u.dot(a.matrix * u) - 1.0) <= 1e-10);

  const Eigen::SparseMatrix<double> asym = a.matrix - Eigen::SparseMatrix<double>(a.matrix.transpose());
  CHECK(max_abs(asym) <= 1e-13 * max_abs(a.matrix));
}

TEST_CASE("divergence matrix") {
  const TaylorHoodSpace space(testing::square(4));
  const SparseOperator b = assemble_divergence(space);
  CHECK(b.rows() == space.n_pr());
  CHECK(b.cols() == space.n_vel());
  const Eigen::VectorXd constant = interpolate(space, [](const Point2&) { return Vec2{0.3, -1.2}; });
  CHECK((b.matrix * constant).cwiseAbs().maxCoeff() <= 1e-11);
  const Eigen::VectorXd saddle = interpolate(space, [](const Point2& p) { return Vec2{p.x, -p.y}; });
  CHECK((b.matrix * saddle).cwiseAbs().maxCoeff() <= 1e-10);
  const Eigen::VectorXd radial = interpolate(space, [](const Point2& p) { return Vec2{p.x, p.y}; });
  CHECK(std::abs((b.matrix * radial).sum() - 2.0) <= 1e-10);
}

TEST_CASE("convection matrix is skew and matches the divergence form") {
  const TaylorHoodSpace space(testing::square(5));
  testing::Fields f;
  CHECK(assemble_convection(space, Eigen::VectorXd::Zero(space.n_vel())).matrix.norm() == 0.0);
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd w = f.any(space);
    const Eigen::VectorXd u = f.any(space);
    const SparseOperator n = assemble_convection(space, w);
    CHECK(std::abs(u.dot(n.matrix * u)) <= 1e-12 * w.cwiseAbs().maxCoeff() * u.squaredNorm());
  }
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd w = f.interior(space);
    const Eigen::SparseMatrix<double> skew = assemble_convection(space, w).matrix;
    const Eigen::SparseMatrix<double> direct = assemble_convection_divergence_form(space, w).matrix;
    CHECK(max_abs(skew - direct) <= 1e-11 * max_abs(direct));
  }
}

TEST_CASE("trilinear form consistency and antisymmetry") {
  const TaylorHoodSpace space(testing::square(4));
  const SparseOperator a = assemble_stiffness(space);
  const SparseOperator m = assemble_mass(space);
  testing::Fields f;
  double constant = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd w = f.interior(space), u = f.interior(space), v = f.interior(space);
    const double b = trilinear(space, w, u, v);
    const double matrix_form = v.dot(assemble_convection(space, w).matrix * u);
    CHECK(std::abs(b - matrix_form) <= 1e-12 * std::max(1.0, std::abs(b)));
    CHECK(std::abs(b + trilinear(space, w, v, u)) <= 1e-12 * std::max(1.0, std::abs(b)));
    CHECK(std::abs(trilinear(space, w, u, u)) <= 1e-11);
    const double bound = std::sqrt(w.dot(a.matrix * w)) * std::sqrt(u.dot(a.matrix * u)) *
                         std::sqrt(std::sqrt(v.dot(m.matrix * v)) * std::sqrt(v.dot(a.matrix * v)));
    constant = std::max(constant, std::abs(b) / bound);
  }
  // Empirical constant of the trilinear bound.
  CHECK(std::isfinite(constant));
  CHECK(constant > 0.0);
  MESSAGE("empirical In1 constant: " << constant);
}

TEST_CASE("interpolation") {
  const TaylorHoodSpace space(testing::square(3));
  CHECK(interpolate(space, [](const Point2&) { return Vec2{0.0, 0.0}; }).norm() == 0.0);
  const VectorFunction quad = [](const Point2& p) {
    return Vec2{1 + p.x - 2 * p.y + 3 * p.x * p.y - p.x * p.x, p.y * p.y - 0.5 * p.x + 2 * p.x * p.y};
  };
  CHECK(l2_error(space, interpolate(space, quad), quad) <= 1e-12);

  const VectorFunction smooth = [](const Point2& p) {
    const double s = std::sin(std::numbers::pi * p.x) * std::sin(std::numbers::pi * p.y);
    return Vec2{s, -s};
  };
  std::vector<double> errors;
  for (int n : {4, 8, 16, 32}) {
    const TaylorHoodSpace s(testing::square(n));
    errors.push_back(l2_error(s, interpolate(s, smooth), smooth));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) CHECK(std::log2(errors[i - 1] / errors[i]) >= 2.8);
}

TEST_CASE("norms") {
  const TaylorHoodSpace space(testing::square(4));
  const FieldNorms c = norms(space, interpolate(space, [](const Point2&) { return Vec2{1.0, 0.0}; }));
  CHECK(std::abs(c.l2 - 1.0) <= 1e-12);
  CHECK(c.h1_semi <= 1e-12);
  CHECK(std::abs(c.l3 - 1.0) <= 1e-12);
  const FieldNorms x = norms(space, interpolate(space, [](const Point2& p) { return Vec2{p.x, 0.0}; }));
  CHECK(std::abs(x.l2 - 1.0 / std::sqrt(3.0)) <= 1e-10);
  CHECK(std::abs(x.h1_semi - 1.0) <= 1e-10);

  testing::Fields f;
  for (int i = 0; i < 20; ++i) {
    const FieldNorms n = norms(space, f.interior(space));
    CHECK(n.l6 <= 2.0 / std::sqrt(3.0) * n.h1_semi);
  }
}

TEST_CASE("steady Stokes") {
  const TaylorHoodSpace square(testing::square(4));
  const VelocityPressure zero = solve_steady_stokes(square, [](const Point2&) { return Vec2{0.0, 0.0}; }, 0.1);
  CHECK(zero.velocity.norm() == 0.0);
  CHECK(zero.pressure.norm() == 0.0);

  const auto mesh = make_mesh("offset_circles_coarse.msh2d");
  const TaylorHoodSpace space(mesh);
  const SparseOperator b = assemble_divergence(space);
  const Forcing f = offset_circles_forcing(0.0);
  const VelocityPressure s = solve_steady_stokes(space, f.at(0.0), 0.02);
  CHECK((b.matrix * s.velocity).norm() <= 1e-10 * s.velocity.norm());
  CHECK(0.5 * std::pow(norms(space, s.velocity).l2, 2) > 0.0);
  double circulation = 0.0;
  for (int node = 0; node < space.n_nodes(); ++node) {
    const Point2& p = space.node(node);
    circulation += p.x * s.velocity[space.velocity_dof(1, node)] - p.y * s.velocity[space.velocity_dof(0, node)];
  }
  CHECK(circulation > 0.0);

}

TEST_CASE("assembly is deterministic") {
  const TaylorHoodSpace space(testing::square(4));
  testing::Fields f;
  const Eigen::VectorXd w = f.any(space);
  const SparseOperator n1 = assemble_convection(space, w);
  const SparseOperator n2 = assemble_convection(space, w);
  CHECK(Eigen::Map<const Eigen::VectorXd>(n1.matrix.valuePtr(), n1.matrix.nonZeros()) ==
        Eigen::Map<const Eigen::VectorXd>(n2.matrix.valuePtr(), n2.matrix.nonZeros()));
}

}
