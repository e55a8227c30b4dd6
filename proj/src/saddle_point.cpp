#include "enspod/saddle_point.hpp"

#include <cmath>

#include "enspod/error.hpp"

namespace enspod {

namespace {

int find_slot(const Eigen::SparseMatrix<double>& m, int row, int col) {
  const int* inner = m.innerIndexPtr();
  const int* begin = inner + m.outerIndexPtr()[col];
  const int* end = inner + m.outerIndexPtr()[col + 1];
  const int* pos = std::lower_bound(begin, end, row);
  if (pos == end || *pos != row) throw SolverError("saddle-point pattern is missing an entry");
  return static_cast<int>(pos - inner);
}

}  // namespace

SaddlePointSystem::SaddlePointSystem(const TaylorHoodSpace& space, const SparseOperator& mass,
                                     const SparseOperator& stiffness,
                                     const SparseOperator& divergence)
    : space_(space), mass_(mass), stiffness_(stiffness), divergence_(divergence) {
  const int nv = space.n_vel();
  const int np = space.n_pr();
  const int n = nv + np + 1;
  const auto& pattern = space.velocity_pattern();
  if (mass.matrix.nonZeros() != pattern.nonZeros() ||
      stiffness.matrix.nonZeros() != pattern.nonZeros()) {
    throw InvalidArgument("mass and stiffness must be assembled on the space's velocity pattern");
  }
  if (divergence.rows() != np || divergence.cols() != nv) {
    throw InvalidArgument("divergence operator has the wrong shape");
  }

  mean_ = Eigen::VectorXd::Zero(np);
  for (int t = 0; t < space.mesh().n_triangles(); ++t) {
    const double third = space.geometry(t).area / 3.0;
    for (int k : space.pressure_dofs(t)) mean_[k] += third;
  }

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(pattern.nonZeros() + 2 * divergence.matrix.nonZeros() + 2 * np + nv));
  for (int col = 0; col < nv; ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(pattern, col); it; ++it) {
      entries.emplace_back(static_cast<int>(it.row()), col, 0.0);
    }
  }
  for (int col = 0; col < nv; ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(divergence.matrix, col); it; ++it) {
      entries.emplace_back(nv + static_cast<int>(it.row()), col, 0.0);
      entries.emplace_back(col, nv + static_cast<int>(it.row()), 0.0);
    }
  }
  for (int k = 0; k < np; ++k) {
    entries.emplace_back(nv + k, n - 1, 0.0);
    entries.emplace_back(n - 1, nv + k, 0.0);
  }
  system_.resize(n, n);
  system_.setFromTriplets(entries.begin(), entries.end());
  system_.makeCompressed();

  velocity_slot_.reserve(static_cast<std::size_t>(pattern.nonZeros()));
  for (int col = 0; col < nv; ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(pattern, col); it; ++it) {
      const int row = static_cast<int>(it.row());
      const bool constrained = space.is_dirichlet(row) || space.is_dirichlet(col);
      velocity_slot_.push_back(constrained ? -1 : find_slot(system_, row, col));
    }
  }
  for (int d : space.dirichlet_dofs()) velocity_diagonal_.push_back(find_slot(system_, d, d));
  for (int col = 0; col < nv; ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(divergence.matrix, col); it; ++it) {
      const int row = nv + static_cast<int>(it.row());
      if (space.is_dirichlet(col)) {
        divergence_slot_.push_back({-1, -1});
      } else {
        divergence_slot_.push_back({find_slot(system_, row, col), find_slot(system_, col, row)});
      }
    }
  }
  for (int k = 0; k < np; ++k) {
    mean_slot_.push_back({find_slot(system_, nv + k, n - 1), find_slot(system_, n - 1, nv + k)});
  }
}

void SaddlePointSystem::factorize(double mass_coeff, double visc_coeff,
                                  const SparseOperator* convection, double conv_coeff) {
  if (convection && convection->matrix.nonZeros() != space_.velocity_pattern().nonZeros()) {
    throw InvalidArgument("convection operator must use the space's velocity pattern");
  }
  double* values = system_.valuePtr();
  std::fill(values, values + system_.nonZeros(), 0.0);
  const double* m = mass_.matrix.valuePtr();
  const double* a = stiffness_.matrix.valuePtr();
  const double* c = convection ? convection->matrix.valuePtr() : nullptr;
  for (std::size_t e = 0; e < velocity_slot_.size(); ++e) {
    const int slot = velocity_slot_[e];
    if (slot < 0) continue;
    double v = mass_coeff * m[e] + visc_coeff * a[e];
    if (c) v += conv_coeff * c[e];
    values[slot] = v;
  }
  for (int slot : velocity_diagonal_) values[slot] = 1.0;
  const double* b = divergence_.matrix.valuePtr();
  for (std::size_t e = 0; e < divergence_slot_.size(); ++e) {
    if (divergence_slot_[e][0] < 0) continue;
    values[divergence_slot_[e][0]] = -b[e];
    values[divergence_slot_[e][1]] = -b[e];
  }
  for (std::size_t k = 0; k < mean_slot_.size(); ++k) {
    values[mean_slot_[k][0]] = mean_[static_cast<Eigen::Index>(k)];
    values[mean_slot_[k][1]] = mean_[static_cast<Eigen::Index>(k)];
  }

  if (!analyzed_) {
    lu_.analyzePattern(system_);
    analyzed_ = true;
  }
  lu_.factorize(system_);
  factorized_ = lu_.info() == Eigen::Success;
  if (!factorized_) throw SolverError("saddle-point factorization failed: " + lu_.lastErrorMessage());
  ++factorizations_;
}

VelocityPressure SaddlePointSystem::solve(const Coefficients& rhs) const {
  if (!factorized_) throw SolverError("solve called before a successful factorization");
  const int nv = space_.n_vel();
  const int np = space_.n_pr();
  if (rhs.size() != nv) throw InvalidArgument("right-hand side has the wrong length");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(system_.rows());
  full.head(nv) = rhs;
  for (int d : space_.dirichlet_dofs()) full[d] = 0.0;
  Eigen::VectorXd x = lu_.solve(full);
  if (lu_.info() != Eigen::Success || !x.allFinite()) {
    throw SolverError("saddle-point back-substitution failed");
  }
  return {x.head(nv), x.segment(nv, np)};
}

VelocityPressure solve_steady_stokes(const TaylorHoodSpace& space, const VectorFunction& force,
                                     double nu) {
  if (!(nu > 0.0)) throw InvalidArgument("viscosity must be positive");
  const SparseOperator mass = assemble_mass(space);
  const SparseOperator stiffness = assemble_stiffness(space);
  const SparseOperator divergence = assemble_divergence(space);
  SaddlePointSystem system(space, mass, stiffness, divergence);
  system.factorize(0.0, nu, nullptr);
  return system.solve(load_vector(space, force));
}

}  // namespace enspod
