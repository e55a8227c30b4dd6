#include "enspod/ensemble_rom.hpp"

#include <cmath>

#include "enspod/error.hpp"

namespace enspod {

Eigen::MatrixXd ReducedOperators::contract(const Eigen::VectorXd& c) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim(), dim());
  for (int k = 0; k < dim(); ++k) out += c[k] * convection[static_cast<std::size_t>(k)];
  return out;
}

ReducedOperators reduce_operators(const PodBasis& basis, const TaylorHoodSpace& space,
                                  const SparseOperator& stiffness, const SparseOperator& divergence,
                                  double div_tol) {
  const int R = basis.active;
  const auto modes = basis.active_modes();
  if (modes.rows() != space.n_vel()) throw InvalidArgument("basis does not belong to this space");
  for (int i = 0; i < R; ++i) {
    const double residual = (divergence.matrix * modes.col(i)).norm();
    if (residual > div_tol) {
      throw ValidationError("POD mode " + std::to_string(i + 1) + " is not discretely divergence free (" +
                            std::to_string(residual) + ")");
    }
  }
  ReducedOperators ops;
  Eigen::MatrixXd k = modes.transpose() * (stiffness.matrix * modes);
  ops.stiffness = 0.5 * (k + k.transpose());
  ops.convection.reserve(static_cast<std::size_t>(R));
  for (int c = 0; c < R; ++c) {
    const SparseOperator n = assemble_convection(space, modes.col(c));
    Eigen::MatrixXd t = modes.transpose() * (n.matrix * modes);
    ops.convection.push_back(0.5 * (t - t.transpose()));
  }
  return ops;
}

ReducedForceProjector::ReducedForceProjector(const TaylorHoodSpace& space, const PodBasis& basis,
                                             std::vector<Forcing> forces)
    : space_(space),
      modes_(basis.active_modes()),
      forces_(std::move(forces)),
      full_cache_(forces_.size()),
      reduced_cache_(forces_.size()) {
  for (int j = 0; j < members(); ++j) {
    if (forces_[static_cast<std::size_t>(j)].autonomous) (*this)(j, 0.0);
  }
}

const Eigen::VectorXd& ReducedForceProjector::full_load(int member, double t) {
  const auto idx = static_cast<std::size_t>(member);
  const Forcing& force = forces_.at(idx);
  if (force.autonomous) {
    if (!full_cache_[idx]) full_cache_[idx] = load_vector(space_, force.at(0.0));
    return *full_cache_[idx];
  }
  scratch_full_ = load_vector(space_, force.at(t));
  return scratch_full_;
}

const Eigen::VectorXd& ReducedForceProjector::operator()(int member, double t) {
  const auto idx = static_cast<std::size_t>(member);
  if (forces_.at(idx).autonomous) {
    if (!reduced_cache_[idx]) reduced_cache_[idx] = modes_.transpose() * full_load(member, t);
    return *reduced_cache_[idx];
  }
  scratch_reduced_ = modes_.transpose() * full_load(member, t);
  return scratch_reduced_;
}

ReducedEnsembleState rom_initialize(const PodBasis& basis, const SparseOperator& mass,
                                    const std::vector<Coefficients>& initial,
                                    const std::vector<Coefficients>& first, double dt) {
  if (initial.size() != first.size() || initial.empty()) {
    throw InvalidArgument("need matching non-empty initial and first levels");
  }
  ReducedEnsembleState state;
  state.step = 1;
  state.dt = dt;
  for (std::size_t j = 0; j < initial.size(); ++j) {
    state.previous.push_back(project_l2(basis, mass, initial[j]).coefficients);
    state.current.push_back(project_l2(basis, mass, first[j]).coefficients);
  }
  return state;
}

RomStepper::RomStepper(const ReducedOperators& ops, ReducedForceProjector& forces, double nu, double dt)
    : ops_(ops), forces_(forces), nu_(nu), dt_(dt) {
  if (!(nu > 0.0)) throw InvalidArgument("viscosity must be positive");
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  const int R = ops.dim();
  base_ = (1.5 / dt) * Eigen::MatrixXd::Identity(R, R) + nu * ops.stiffness;
}

void RomStepper::step(ReducedEnsembleState& state) {
  if (state.members() != forces_.members()) throw InvalidArgument("state and force member counts differ");
  if (state.step < 1) throw InvalidArgument("reduced step needs two time levels (n >= 1)");
  const MeanFluctuation mf = compute_mean_fluct(state.current, state.previous);
  matrix_ = base_ + ops_.contract(mf.mean);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(matrix_);
  ++factorizations_;
  if (!(lu.rcond() > 1e-14)) {
    throw SolverError("singular reduced matrix at step " + std::to_string(state.step));
  }
  const double t_next = (state.step + 1) * dt_;
  std::vector<Eigen::VectorXd> next(state.current.size());
  for (int j = 0; j < state.members(); ++j) {
    const auto idx = static_cast<std::size_t>(j);
    const Eigen::VectorXd& an = state.current[idx];
    const Eigen::VectorXd& aprev = state.previous[idx];
    Eigen::VectorXd rhs = forces_(j, t_next) + (0.5 / dt_) * (4.0 * an - aprev);
    if (mf.fluctuations[idx].squaredNorm() > 0.0) {
      rhs -= ops_.contract(mf.fluctuations[idx]) * (2.0 * an - aprev);
    }
    next[idx] = lu.solve(rhs);
    if (!next[idx].allFinite()) {
      throw NumericalError("non-finite reduced coefficients at step " + std::to_string(state.step + 1));
    }
  }
  state.previous = std::move(state.current);
  state.current = std::move(next);
  ++state.step;
}

namespace {

Eigen::VectorXd average_of(const std::vector<Eigen::VectorXd>& members) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(members.front().size());
  for (const auto& a : members) sum += a;
  return sum / static_cast<double>(members.size());
}

}  // namespace

RomRunResult rom_run(ReducedEnsembleState& state, RomStepper& stepper, double final_time,
                     const std::function<void(const ReducedEnsembleState&)>& observer) {
  if (state.step != 1) throw InvalidArgument("reduced run starts from n = 1");
  const int total = steps_for(final_time, state.dt);
  RomRunResult result;
  result.times.push_back(0.0);
  result.average.push_back(average_of(state.previous));
  result.times.push_back(state.dt);
  result.average.push_back(average_of(state.current));
  if (observer) observer(state);
  while (state.step < total) {
    stepper.step(state);
    result.times.push_back(state.time());
    result.average.push_back(average_of(state.current));
    if (observer) observer(state);
  }
  return result;
}

}  // namespace enspod
