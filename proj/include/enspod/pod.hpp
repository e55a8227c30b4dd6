#pragma once

#include <Eigen/Dense>

#include "enspod/assembly.hpp"

namespace enspod {

/// Snapshot matrix: columns are velocity coefficient vectors, member-major
/// (all saved levels of member 1, then member 2, ...).
struct SnapshotSet {
  Eigen::MatrixXd columns;
  int members = 0;
  int per_member = 0;  // saved levels per member (N_S + 1)
  double dt = 0.0;
  int stride = 1;

  int count() const { return static_cast<int>(columns.cols()); }
  Eigen::Index n_vel() const { return columns.rows(); }
  int column(int member, int level) const { return member * per_member + level; }
};

/// POD basis from the method of snapshots.
///
/// `modes` holds every mode above the eigenvalue cutoff (the numerical
/// rank); `active` of them form the reduced space X_R. `eigenvalues` is the
/// full clamped spectrum of A^T M A in descending order, so tail sums are
/// exact.
struct PodBasis {
  Eigen::MatrixXd modes;
  Eigen::VectorXd eigenvalues;
  int rank = 0;
  int active = 0;
  Eigen::MatrixXd gradient_gram;  // (grad phi_i, grad phi_j), rank x rank
  /// lambda_i ||grad phi_i||^2 for all snapshot directions, including those
  /// below the cutoff. Not stored on disk.
  Eigen::VectorXd gradient_tail;

  Eigen::Index n_vel() const { return modes.rows(); }
  auto active_modes() const { return modes.leftCols(active); }
  double gradient_norm(int i) const { return std::sqrt(gradient_gram(i, i)); }

  /// S_R = I + nu K_R over the active modes.
  Eigen::MatrixXd reduced_stiffness_plus_mass(double nu) const;

  /// Same basis restricted to the leading R modes.
  PodBasis truncated(int R) const;
};

/// C = A^T M A.
Eigen::MatrixXd correlation_matrix(const SnapshotSet& snapshots, const SparseOperator& mass);

/// Method of snapshots: C a_i = lambda_i a_i, phi_i = A a_i / sqrt(lambda_i).
/// Computed from the thin SVD of L^T P A (M = P^T L L^T P), so lambda_i =
/// sigma_i^2 and a_i are the right singular vectors.
/// Eigenvalues at or below cutoff * lambda_1 are dropped from the basis.
/// Eigenvector sign: first component with magnitude above 1e-12 max|a_i|
/// is positive. Throws RankError when R exceeds the retained rank.
PodBasis build_basis(const SnapshotSet& snapshots, const SparseOperator& mass,
                     const SparseOperator& stiffness, int R, double cutoff = 1e-12);

/// Recomputes the gradient Gram matrix (used after loading modes from disk).
void attach_stiffness(PodBasis& basis, const SparseOperator& stiffness);

struct Projection {
  Eigen::VectorXd coefficients;  // a_i = (u, phi_i)
  Coefficients lifted;           // sum a_i phi_i
};

/// L2 projection onto the active modes.
Projection project_l2(const PodBasis& basis, const SparseOperator& mass, const Coefficients& u);

Coefficients lift(const PodBasis& basis, const Eigen::VectorXd& coefficients);

struct TailIdentity {
  double lhs = 0.0;
  double rhs = 0.0;

  /// |lhs - rhs| <= rel_tol * rhs, or <= abs_tol when rhs is below abs_tol.
  bool holds(double rel_tol, double abs_tol) const;
};

/// Mean squared L2 projection error of the snapshots against
/// sum_{i>R} lambda_i / count.
TailIdentity tail_identity_l2(const SnapshotSet& snapshots, const PodBasis& basis,
                              const SparseOperator& mass, int R);

/// Mean squared H1-seminorm projection error against
/// sum_{i>R} lambda_i ||grad phi_i||^2 / count, summed over gradient_tail
/// when present and over the retained modes otherwise.
TailIdentity tail_identity_h1(const SnapshotSet& snapshots, const PodBasis& basis,
                              const SparseOperator& mass, const SparseOperator& stiffness, int R);

struct SpectralNorm {
  double stiffness_norm = 0.0;  // |||S_R|||_2
  double mass_norm = 0.0;       // |||M_R|||_2, 1 for an orthonormal basis
  int iterations = 0;
};

/// |||S_R|||_2 by symmetric power iteration (relative tolerance 1e-8, at
/// most 10000 iterations) and the check |||M_R|||_2 = 1 within 1e-10.
SpectralNorm stiffness_spectral_norm(const PodBasis& basis, const SparseOperator& mass, double nu);

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration; throws NumericalError when it does not converge.
double symmetric_power_iteration(const Eigen::MatrixXd& matrix, double rel_tol, int max_iterations,
                                 int* iterations = nullptr);

}  // namespace enspod
