#include "enspod/ensemble_full.hpp"

#include <algorithm>
#include <cmath>

#include "enspod/error.hpp"

namespace enspod {

MeanFluctuation compute_mean_fluct(const std::vector<Eigen::VectorXd>& current,
                                   const std::vector<Eigen::VectorXd>& previous) {
  const std::size_t J = current.size();
  if (J == 0) throw InvalidArgument("ensemble needs at least one member");
  if (previous.size() != J) throw InvalidArgument("ensemble levels have different member counts");
  const Eigen::Index n = current.front().size();
  std::vector<Eigen::VectorXd> extrapolated(J);
  for (std::size_t j = 0; j < J; ++j) {
    if (current[j].size() != n || previous[j].size() != n) {
      throw InvalidArgument("ensemble members have different lengths");
    }
    extrapolated[j] = 2.0 * current[j] - previous[j];
  }
  MeanFluctuation out;
  out.mean.resize(n);
  std::vector<double> column(J);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < J; ++j) column[j] = extrapolated[j][i];
    std::sort(column.begin(), column.end());
    double sum = 0.0;
    for (double v : column) sum += v;
    out.mean[i] = sum / static_cast<double>(J);
  }
  out.fluctuations.resize(J);
  for (std::size_t j = 0; j < J; ++j) out.fluctuations[j] = extrapolated[j] - out.mean;
  return out;
}

MeanFluctuation compute_mean_fluct(const EnsembleState& state) {
  return compute_mean_fluct(state.current, state.previous);
}

int steps_for(double final_time, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (!(final_time > 0.0)) throw InvalidArgument("final time must be positive");
  const double ratio = final_time / dt;
  const long long n = std::llround(ratio);
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio)) {
    throw InvalidArgument("final time must be a positive multiple of the time step");
  }
  return static_cast<int>(n);
}

EnsembleFullSolver::EnsembleFullSolver(const TaylorHoodSpace& space, double nu, double dt,
                                       std::vector<Forcing> forces)
    : space_(space),
      nu_(nu),
      dt_(dt),
      forces_(std::move(forces)),
      mass_(assemble_mass(space)),
      stiffness_(assemble_stiffness(space)),
      divergence_(assemble_divergence(space)),
      system_(space, mass_, stiffness_, divergence_),
      load_cache_(forces_.size()) {
  if (!(nu > 0.0)) throw InvalidArgument("viscosity must be positive");
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (forces_.empty()) throw InvalidArgument("ensemble needs at least one member");
}

const Eigen::VectorXd& EnsembleFullSolver::load(int member, double t) {
  const Forcing& force = forces_.at(static_cast<std::size_t>(member));
  if (force.autonomous) {
    auto& cached = load_cache_[static_cast<std::size_t>(member)];
    if (!cached) cached = load_vector(space_, force.at(0.0));
    return *cached;
  }
  scratch_load_ = load_vector(space_, force.at(t));
  return scratch_load_;
}

void EnsembleFullSolver::check_divergence(const Eigen::VectorXd& u, int step) {
  if (!u.allFinite()) {
    throw NumericalError("non-finite velocity at step " + std::to_string(step));
  }
  const double norm = u.norm();
  const double residual = (divergence_.matrix * u).norm();
  const double relative = norm > 0.0 ? residual / norm : residual;
  max_divergence_residual_ = std::max(max_divergence_residual_, relative);
  if (relative > 1e-8) {
    throw SolverError("discrete divergence residual " + std::to_string(relative) + " at step " +
                      std::to_string(step));
  }
}

EnsembleState EnsembleFullSolver::bootstrap(const std::vector<Eigen::VectorXd>& initial) {
  if (static_cast<int>(initial.size()) != members()) {
    throw InvalidArgument("bootstrap needs one initial field per member");
  }
  EnsembleState state;
  state.dt = dt_;
  state.step = 1;
  state.previous = initial;
  state.current.resize(initial.size());
  for (int j = 0; j < members(); ++j) {
    const Eigen::VectorXd& u0 = initial[static_cast<std::size_t>(j)];
    if (u0.size() != space_.n_vel()) throw InvalidArgument("initial field has the wrong length");
    const Eigen::VectorXd force = 0.5 * (load(j, 0.0) + load(j, dt_));
    const Eigen::VectorXd history = (1.0 / dt_) * (mass_.matrix * u0) - (0.5 * nu_) * (stiffness_.matrix * u0) + force;
    Eigen::VectorXd iterate = u0;
    double first_change = 0.0;
    for (int k = 0; k < 2; ++k) {
      const Eigen::VectorXd convecting = k == 0 ? u0 : Eigen::VectorXd(0.5 * (u0 + iterate));
      const SparseOperator conv = assemble_convection(space_, convecting);
      system_.factorize(1.0 / dt_, 0.5 * nu_, &conv, 0.5);
      const Eigen::VectorXd rhs = history - 0.5 * (conv.matrix * u0);
      Eigen::VectorXd next = system_.solve(rhs).velocity;
      const double change = (next - iterate).norm();
      if (!next.allFinite()) throw SolverError("bootstrap produced non-finite values");
      if (k == 0) {
        first_change = change;
      } else if (change > first_change && change > 1e-14 * next.norm()) {
        throw SolverError("bootstrap fixed-point iteration diverged for member " + std::to_string(j));
      }
      iterate = std::move(next);
    }
    check_divergence(iterate, 1);
    state.current[static_cast<std::size_t>(j)] = std::move(iterate);
  }
  factorized_step_ = -1;
  return state;
}

void EnsembleFullSolver::step(EnsembleState& state) {
  if (state.members() != members()) throw InvalidArgument("state and solver member counts differ");
  if (state.step < 1) throw InvalidArgument("ensemble step needs two time levels (n >= 1)");
  for (int j = 0; j < members(); ++j) {
    if (!state.current[static_cast<std::size_t>(j)].allFinite() || !state.previous[static_cast<std::size_t>(j)].allFinite()) {
      throw NumericalError("non-finite velocity entering step " + std::to_string(state.step));
    }
  }
  const MeanFluctuation mf = compute_mean_fluct(state);
  const SparseOperator mean_convection = assemble_convection(space_, mf.mean);
  try {
    system_.factorize(1.5 / dt_, nu_, &mean_convection);
  } catch (const SolverError& e) {
    throw SolverError(std::string(e.what()) + " at step " + std::to_string(state.step));
  }
  factorized_step_ = state.step;
  const double t_next = (state.step + 1) * dt_;
  std::vector<Eigen::VectorXd> next(state.current.size());
  for (int j = 0; j < members(); ++j) {
    const auto idx = static_cast<std::size_t>(j);
    const Eigen::VectorXd& un = state.current[idx];
    const Eigen::VectorXd& uprev = state.previous[idx];
    Eigen::VectorXd rhs = load(j, t_next) + (0.5 / dt_) * (mass_.matrix * (4.0 * un - uprev));
    if (mf.fluctuations[idx].squaredNorm() > 0.0) {
      rhs -= convection_action(space_, mf.fluctuations[idx], 2.0 * un - uprev);
    }
    next[idx] = system_.solve(rhs).velocity;
    check_divergence(next[idx], state.step + 1);
  }
  state.previous = std::move(state.current);
  state.current = std::move(next);
  ++state.step;
}

std::vector<TimeseriesRow> timeseries_rows(const TaylorHoodSpace& space,
                                           const std::vector<Eigen::VectorXd>& members,
                                           const Eigen::VectorXd& average, int step, double time,
                                           double nu) {
  std::vector<TimeseriesRow> rows;
  for (std::size_t j = 0; j < members.size(); ++j) {
    const auto ee = energy_enstrophy(space, members[j], nu);
    rows.push_back({step, time, static_cast<int>(j), ee.energy, ee.enstrophy});
  }
  const auto ee = energy_enstrophy(space, average, nu);
  rows.push_back({step, time, -1, ee.energy, ee.enstrophy});
  return rows;
}

namespace {

Eigen::VectorXd member_average(const std::vector<Eigen::VectorXd>& members) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(members.front().size());
  for (const auto& u : members) sum += u;
  return sum / static_cast<double>(members.size());
}

}  // namespace

FullRunResult EnsembleFullSolver::run(EnsembleState& state, double final_time,
                                      const FullRunOptions& options) {
  if (options.snapshot_stride < 1) throw InvalidArgument("snapshot stride must be >= 1");
  if (state.step != 1) throw InvalidArgument("run starts from the bootstrapped state (n = 1)");
  const int total = steps_for(final_time, dt_);
  const int J = state.members();

  std::vector<std::vector<Eigen::VectorXd>> saved(static_cast<std::size_t>(J));
  FullRunResult result;
  auto record = [&](const std::vector<Eigen::VectorXd>& fields, int n) {
    if (n % options.snapshot_stride == 0) {
      for (int j = 0; j < J; ++j) saved[static_cast<std::size_t>(j)].push_back(fields[static_cast<std::size_t>(j)]);
    }
    const double t = n * dt_;
    result.times.push_back(t);
    if (options.record_average || options.record_timeseries) {
      Eigen::VectorXd avg = member_average(fields);
      if (options.record_timeseries) {
        auto rows = timeseries_rows(space_, fields, avg, n, t, nu_);
        result.timeseries.insert(result.timeseries.end(), rows.begin(), rows.end());
      }
      if (options.record_average) result.average.push_back(std::move(avg));
    }
  };

  record(state.previous, 0);
  record(state.current, 1);
  if (options.observer) options.observer(state);
  while (state.step < total) {
    step(state);
    record(state.current, state.step);
    if (options.observer) options.observer(state);
  }

  const int per_member = static_cast<int>(saved.front().size());
  result.snapshots.members = J;
  result.snapshots.per_member = per_member;
  result.snapshots.dt = dt_;
  result.snapshots.stride = options.snapshot_stride;
  result.snapshots.columns.resize(space_.n_vel(), static_cast<Eigen::Index>(J) * per_member);
  for (int j = 0; j < J; ++j) {
    for (int m = 0; m < per_member; ++m) {
      result.snapshots.columns.col(result.snapshots.column(j, m)) = saved[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)];
    }
  }
  return result;
}

}  // namespace enspod
