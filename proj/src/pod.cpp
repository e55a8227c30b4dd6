#include "enspod/pod.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>

#include "enspod/error.hpp"

namespace enspod {

Eigen::MatrixXd PodBasis::reduced_stiffness_plus_mass(double nu) const {
  return Eigen::MatrixXd::Identity(active, active) + nu * gradient_gram.topLeftCorner(active, active);
}

PodBasis PodBasis::truncated(int R) const {
  if (R < 0 || R > rank) throw RankError("cannot truncate basis to " + std::to_string(R), rank);
  PodBasis out = *this;
  out.active = R;
  return out;
}

Eigen::MatrixXd correlation_matrix(const SnapshotSet& snapshots, const SparseOperator& mass) {
  if (snapshots.n_vel() != mass.rows()) {
    throw InvalidArgument("snapshot length does not match the mass matrix");
  }
  const Eigen::MatrixXd weighted = mass.matrix * snapshots.columns;
  Eigen::MatrixXd c = snapshots.columns.transpose() * weighted;
  return 0.5 * (c + c.transpose());
}

void attach_stiffness(PodBasis& basis, const SparseOperator& stiffness) {
  if (basis.n_vel() != stiffness.rows()) throw InvalidArgument("basis length does not match stiffness");
  const Eigen::MatrixXd weighted = stiffness.matrix * basis.modes;
  Eigen::MatrixXd k = basis.modes.transpose() * weighted;
  basis.gradient_gram = 0.5 * (k + k.transpose());
}

PodBasis build_basis(const SnapshotSet& snapshots, const SparseOperator& mass,
                     const SparseOperator& stiffness, int R, double cutoff) {
  if (R < 0) throw InvalidArgument("basis dimension must be non-negative");
  if (snapshots.count() == 0) throw InvalidArgument("snapshot set is empty");
  if (snapshots.n_vel() != mass.rows()) throw InvalidArgument("snapshot length does not match the mass matrix");

  // C = A^T M A = B^T B with B = L^T P A, M = P^T L L^T P.
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> llt(mass.matrix);
  if (llt.info() != Eigen::Success) throw NumericalError("mass matrix is not positive definite");
  const Eigen::SparseMatrix<double> lower = llt.matrixL();
  const Eigen::MatrixXd permuted = llt.permutationP() * snapshots.columns;
  const Eigen::MatrixXd b = lower.transpose() * permuted;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);

  const Eigen::Index count = snapshots.count();
  const Eigen::Index k = svd.singularValues().size();
  PodBasis basis;
  basis.eigenvalues = Eigen::VectorXd::Zero(count);
  for (Eigen::Index i = 0; i < k; ++i) basis.eigenvalues[i] = svd.singularValues()[i] * svd.singularValues()[i];
  const double largest = basis.eigenvalues[0];
  int rank = 0;
  while (rank < count && largest > 0.0 && basis.eigenvalues[rank] > cutoff * largest) ++rank;
  if (R > rank) throw RankError("requested " + std::to_string(R) + " POD modes", rank);

  Eigen::MatrixXd left = svd.matrixU();
  Eigen::MatrixXd right = svd.matrixV();
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto a = right.col(i);
    const double threshold = 1e-12 * a.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < a.size(); ++j) {
      if (std::abs(a[j]) > threshold) {
        if (a[j] < 0.0) {
          right.col(i) *= -1.0;
          left.col(i) *= -1.0;
        }
        break;
      }
    }
  }

  basis.rank = rank;
  basis.active = R;
  // phi_i = A a_i / sqrt(lambda_i) = P^T L^{-T} u_i
  const Eigen::MatrixXd solved = llt.matrixU().solve(left.leftCols(rank));
  basis.modes = llt.permutationPinv() * solved;
  attach_stiffness(basis, stiffness);

  // lambda_i ||grad phi_i||^2 = ||grad (A a_i)||^2 over every snapshot direction.
  const Eigen::MatrixXd directions = snapshots.columns * right;
  const Eigen::MatrixXd weighted = stiffness.matrix * directions;
  basis.gradient_tail = Eigen::VectorXd::Zero(count);
  for (Eigen::Index i = 0; i < k; ++i) basis.gradient_tail[i] = directions.col(i).dot(weighted.col(i));
  return basis;
}

Projection project_l2(const PodBasis& basis, const SparseOperator& mass, const Coefficients& u) {
  if (u.size() != basis.n_vel()) throw InvalidArgument("field length does not match the basis");
  Projection p;
  p.coefficients = basis.active_modes().transpose() * (mass.matrix * u);
  p.lifted = basis.active_modes() * p.coefficients;
  return p;
}

Coefficients lift(const PodBasis& basis, const Eigen::VectorXd& coefficients) {
  if (coefficients.size() != basis.active) throw InvalidArgument("reduced vector has the wrong length");
  return basis.active_modes() * coefficients;
}

bool TailIdentity::holds(double rel_tol, double abs_tol) const {
  const double diff = std::abs(lhs - rhs);
  if (rhs < abs_tol) return diff <= abs_tol;
  return diff <= rel_tol * rhs;
}

namespace {

Eigen::MatrixXd projection_residuals(const SnapshotSet& snapshots, const PodBasis& basis,
                                     const SparseOperator& mass, int R) {
  if (snapshots.n_vel() != basis.n_vel()) {
    throw ValidationError("basis and snapshots have different field lengths");
  }
  if (R < 0 || R > basis.rank) throw RankError("tail identity for R = " + std::to_string(R), basis.rank);
  const auto modes = basis.modes.leftCols(R);
  const Eigen::MatrixXd coefficients = modes.transpose() * (mass.matrix * snapshots.columns);
  return snapshots.columns - modes * coefficients;
}

double column_energy_sum(const Eigen::MatrixXd& fields, const SparseOperator& op) {
  const Eigen::MatrixXd weighted = op.matrix * fields;
  return fields.cwiseProduct(weighted).sum();
}

}  // namespace

TailIdentity tail_identity_l2(const SnapshotSet& snapshots, const PodBasis& basis,
                              const SparseOperator& mass, int R) {
  if (basis.eigenvalues.size() != snapshots.count()) {
    throw ValidationError("basis was not built from this snapshot set");
  }
  const double count = snapshots.count();
  TailIdentity out;
  out.lhs = column_energy_sum(projection_residuals(snapshots, basis, mass, R), mass) / count;
  out.rhs = basis.eigenvalues.tail(basis.eigenvalues.size() - R).sum() / count;
  return out;
}

TailIdentity tail_identity_h1(const SnapshotSet& snapshots, const PodBasis& basis,
                              const SparseOperator& mass, const SparseOperator& stiffness, int R) {
  if (basis.eigenvalues.size() != snapshots.count()) {
    throw ValidationError("basis was not built from this snapshot set");
  }
  const double count = snapshots.count();
  TailIdentity out;
  out.lhs = column_energy_sum(projection_residuals(snapshots, basis, mass, R), stiffness) / count;
  double tail = 0.0;
  if (basis.gradient_tail.size() == snapshots.count()) {
    for (Eigen::Index i = R; i < basis.gradient_tail.size(); ++i) tail += basis.gradient_tail[i];
  } else {
    for (int i = R; i < basis.rank; ++i) tail += basis.eigenvalues[i] * basis.gradient_gram(i, i);
  }
  out.rhs = tail / count;
  return out;
}

double symmetric_power_iteration(const Eigen::MatrixXd& matrix, double rel_tol, int max_iterations,
                                 int* iterations) {
  const Eigen::Index n = matrix.rows();
  if (n == 0) return 0.0;
  if (n == 1) {
    if (iterations) *iterations = 0;
    return matrix(0, 0);
  }
  // Shift by a Gershgorin lower bound to improve the convergence ratio.
  double shift = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    shift = std::min(shift, matrix(i, i) - (matrix.row(i).cwiseAbs().sum() - std::abs(matrix(i, i))));
  }
  shift = std::max(shift, 0.0);
  const Eigen::MatrixXd shifted = matrix - shift * Eigen::MatrixXd::Identity(n, n);

  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i) / static_cast<double>(n);
  v.normalize();
  for (int it = 1; it <= max_iterations; ++it) {
    const Eigen::VectorXd w = shifted * v;
    const double rho = v.dot(w);
    const double residual = (w - rho * v).norm();
    if (residual <= rel_tol * std::abs(rho + shift) || w.norm() == 0.0) {
      if (iterations) *iterations = it;
      return rho + shift;
    }
    v = w / w.norm();
  }
  throw NumericalError("power iteration did not converge in " + std::to_string(max_iterations) +
                       " iterations");
}

SpectralNorm stiffness_spectral_norm(const PodBasis& basis, const SparseOperator& mass, double nu) {
  SpectralNorm out;
  const int R = basis.active;
  if (R == 0) return out;
  const auto modes = basis.active_modes();
  Eigen::MatrixXd mass_r = modes.transpose() * (mass.matrix * modes);
  mass_r = 0.5 * (mass_r + mass_r.transpose());
  const Eigen::MatrixXd s = mass_r + nu * basis.gradient_gram.topLeftCorner(R, R);
  out.stiffness_norm = symmetric_power_iteration(s, 1e-8, 10000, &out.iterations);
  out.mass_norm = symmetric_power_iteration(mass_r, 1e-12, 10000);
  return out;
}

}  // namespace enspod
