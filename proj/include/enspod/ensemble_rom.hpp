#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "enspod/ensemble_full.hpp"
#include "enspod/forces.hpp"
#include "enspod/pod.hpp"

namespace enspod {

/// K_R(i, j) = (grad phi_j, grad phi_i); convection[k](i, j) = b*(phi_k, phi_j, phi_i).
struct ReducedOperators {
  Eigen::MatrixXd stiffness;
  std::vector<Eigen::MatrixXd> convection;

  int dim() const { return static_cast<int>(stiffness.rows()); }
  /// sum_k c_k T_k
  Eigen::MatrixXd contract(const Eigen::VectorXd& c) const;
};

/// Checks ||B phi_i|| <= div_tol for every active mode (ValidationError
/// otherwise) and builds K_R and T from full-space assembly.
ReducedOperators reduce_operators(const PodBasis& basis, const TaylorHoodSpace& space,
                                  const SparseOperator& stiffness, const SparseOperator& divergence,
                                  double div_tol = 1e-8);

/// Maps member forces to (f^j(t), phi_i). Autonomous forces are projected
/// once at construction.
class ReducedForceProjector {
 public:
  ReducedForceProjector(const TaylorHoodSpace& space, const PodBasis& basis, std::vector<Forcing> forces);

  int members() const { return static_cast<int>(forces_.size()); }
  const Eigen::VectorXd& operator()(int member, double t);
  /// Full-space load vector (f^j(t), v) behind the projection.
  const Eigen::VectorXd& full_load(int member, double t);

 private:
  const TaylorHoodSpace& space_;
  Eigen::MatrixXd modes_;
  std::vector<Forcing> forces_;
  std::vector<std::optional<Eigen::VectorXd>> full_cache_;
  std::vector<std::optional<Eigen::VectorXd>> reduced_cache_;
  Eigen::VectorXd scratch_full_;
  Eigen::VectorXd scratch_reduced_;
};

struct ReducedEnsembleState {
  std::vector<Eigen::VectorXd> current;
  std::vector<Eigen::VectorXd> previous;
  int step = 0;
  double dt = 0.0;

  int members() const { return static_cast<int>(current.size()); }
  double time() const { return step * dt; }
};

/// a^{j,0} and a^{j,1} as L2 projections of the full-space fields.
ReducedEnsembleState rom_initialize(const PodBasis& basis, const SparseOperator& mass,
                                    const std::vector<Coefficients>& initial,
                                    const std::vector<Coefficients>& first, double dt);

/// EnB-POD stepping in R dimensions:
///   G = (3/(2dt)) I + nu K_R + sum_k <a>_k T_k, one LU per step,
///   rhs^j = (f^j, phi) + (1/(2dt))(4a^n - a^{n-1}) - sum_k a'_k T_k (2a^n - a^{n-1}).
class RomStepper {
 public:
  RomStepper(const ReducedOperators& ops, ReducedForceProjector& forces, double nu, double dt);

  void step(ReducedEnsembleState& state);
  /// Matrix of the most recent step.
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  int factorizations() const { return factorizations_; }

 private:
  const ReducedOperators& ops_;
  ReducedForceProjector& forces_;
  double nu_;
  double dt_;
  Eigen::MatrixXd base_;
  Eigen::MatrixXd matrix_;
  int factorizations_ = 0;
};

struct RomRunResult {
  std::vector<double> times;              // t^n, n = 0..N
  std::vector<Eigen::VectorXd> average;   // reduced ensemble average at each level
};

/// Advances from n = 1 to final_time. The observer sees the state at
/// n = 1 and after every step.
RomRunResult rom_run(ReducedEnsembleState& state, RomStepper& stepper, double final_time,
                     const std::function<void(const ReducedEnsembleState&)>& observer = {});

}  // namespace enspod
