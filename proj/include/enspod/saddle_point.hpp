#pragma once

#include <Eigen/SparseLU>

#include "enspod/assembly.hpp"

namespace enspod {

struct VelocityPressure {
  Coefficients velocity;
  Eigen::VectorXd pressure;
};

/// The discrete Oseen/Stokes saddle-point system
///
///   [ K    -B^T  0 ] [u]   [F]
///   [ -B    0    m ] [p] = [0]
///   [ 0    m^T   0 ] [l]   [0]
///
/// with K = alpha M + beta A + gamma N, homogeneous no-slip rows/columns
/// replaced by identity, and m_k = (1, chi_k) pinning the pressure mean.
/// The sparsity pattern is fixed by the space, so the symbolic
/// factorization is computed once and reused by every factorize() call.
class SaddlePointSystem {
 public:
  SaddlePointSystem(const TaylorHoodSpace& space, const SparseOperator& mass,
                    const SparseOperator& stiffness, const SparseOperator& divergence);

  /// Numeric factorization of K = mass_coeff M + visc_coeff A + conv_coeff N.
  /// `convection` may be null. Throws SolverError on failure.
  void factorize(double mass_coeff, double visc_coeff, const SparseOperator* convection,
                 double conv_coeff = 1.0);

  /// Solves for one right-hand side; no-slip entries of `rhs` are ignored.
  VelocityPressure solve(const Coefficients& rhs) const;

  /// System matrix of the last factorize() call.
  const Eigen::SparseMatrix<double>& matrix() const { return system_; }
  int factorizations() const { return factorizations_; }

 private:
  const TaylorHoodSpace& space_;
  const SparseOperator& mass_;
  const SparseOperator& stiffness_;
  const SparseOperator& divergence_;
  Eigen::SparseMatrix<double> system_;
  std::vector<int> velocity_slot_;     // per velocity-pattern nonzero; -1 = constrained
  std::vector<int> velocity_diagonal_; // slots set to 1 for constrained dofs
  std::vector<std::array<int, 2>> divergence_slot_;  // (B, B^T) slots; -1 = constrained
  std::vector<std::array<int, 2>> mean_slot_;
  Eigen::VectorXd mean_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
  bool factorized_ = false;
  int factorizations_ = 0;
};

/// nu A u - B^T p = (f, v), B u = 0, zero-mean pressure, no-slip velocity.
VelocityPressure solve_steady_stokes(const TaylorHoodSpace& space, const VectorFunction& force,
                                     double nu);

}  // namespace enspod
