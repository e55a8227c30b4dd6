#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>

#include "enspod/taylor_hood.hpp"

namespace enspod {

/// Finite element coefficient vector (velocity: length n_vel).
using Coefficients = Eigen::VectorXd;

/// Time-independent vector field.
using VectorFunction = std::function<Vec2(const Point2&)>;

struct SparseOperator {
  Eigen::SparseMatrix<double> matrix;
  bool symmetric = false;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
};

/// M_ij = (psi_j, psi_i) over the vector P2 basis.
SparseOperator assemble_mass(const TaylorHoodSpace& space);

/// A_ij = (grad psi_j, grad psi_i). Viscosity is applied by the caller.
SparseOperator assemble_stiffness(const TaylorHoodSpace& space);

/// B_kj = (div psi_j, chi_k), n_pr x n_vel.
SparseOperator assemble_divergence(const TaylorHoodSpace& space);

/// N(w)_ij = b*(w, psi_j, psi_i) with the explicitly skew-symmetric form
/// b*(w,u,v) = 1/2 (w.grad u, v) - 1/2 (w.grad v, u). Element blocks are
/// antisymmetrised before scattering, so N(w) is skew to the last bit.
SparseOperator assemble_convection(const TaylorHoodSpace& space, const Coefficients& w);

/// Matrix of (w.grad u, v) + 1/2 ((div w) u, v). Equals assemble_convection
/// when w vanishes on the boundary.
SparseOperator assemble_convection_divergence_form(const TaylorHoodSpace& space,
                                                   const Coefficients& w);

/// N(w) u without forming N(w).
Coefficients convection_action(const TaylorHoodSpace& space, const Coefficients& w,
                               const Coefficients& u);

/// b*(w, u, v) by direct quadrature.
double trilinear(const TaylorHoodSpace& space, const Coefficients& w, const Coefficients& u,
                 const Coefficients& v);

/// Nodal interpolant at vertices and edge midpoints.
Coefficients interpolate(const TaylorHoodSpace& space, const VectorFunction& f);

/// F_i = (f, psi_i).
Coefficients load_vector(const TaylorHoodSpace& space, const VectorFunction& f);

struct FieldNorms {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double l3 = 0.0;
  double l6 = 0.0;
};

FieldNorms norms(const TaylorHoodSpace& space, const Coefficients& u);

/// ||curl u||^2 with curl u = d_x u_y - d_y u_x.
double curl_norm_squared(const TaylorHoodSpace& space, const Coefficients& u);

/// ||u_h - u|| against an analytic field, high-order quadrature.
double l2_error(const TaylorHoodSpace& space, const Coefficients& u, const VectorFunction& exact);

/// Velocity value and gradient (grad[c] = grad of component c) of a field
/// at a point of element t.
struct PointValue {
  Vec2 value{};
  std::array<Vec2, 2> grad{};
};
PointValue evaluate(const TaylorHoodSpace& space, const Coefficients& u, int t,
                    const std::array<double, 3>& bary);

}  // namespace enspod
