#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "enspod/diagnostics.hpp"
#include "enspod/forces.hpp"
#include "enspod/pod.hpp"
#include "enspod/saddle_point.hpp"

namespace enspod {

/// J members at two time levels, u^{j,n} and u^{j,n-1}.
struct EnsembleState {
  std::vector<Eigen::VectorXd> current;
  std::vector<Eigen::VectorXd> previous;
  int step = 0;
  double dt = 0.0;

  int members() const { return static_cast<int>(current.size()); }
  double time() const { return step * dt; }
};

struct MeanFluctuation {
  Eigen::VectorXd mean;                      // (1/J) sum_j (2u^{j,n} - u^{j,n-1})
  std::vector<Eigen::VectorXd> fluctuations; // 2u^{j,n} - u^{j,n-1} - mean
};

/// Ensemble mean and fluctuations. The member sum is taken in sorted order
/// per entry, so permuting members permutes the result bit-exactly.
MeanFluctuation compute_mean_fluct(const std::vector<Eigen::VectorXd>& current,
                                   const std::vector<Eigen::VectorXd>& previous);
MeanFluctuation compute_mean_fluct(const EnsembleState& state);

/// Number of steps for a horizon; throws InvalidArgument unless T is a
/// positive multiple of dt.
int steps_for(double final_time, double dt);

struct FullRunOptions {
  int snapshot_stride = 1;
  bool record_average = true;
  bool record_timeseries = true;
  /// Called at every level n >= 1 after the state has advanced (and once
  /// for the starting state).
  std::function<void(const EnsembleState&)> observer;
};

struct FullRunResult {
  SnapshotSet snapshots;
  std::vector<TimeseriesRow> timeseries;
  std::vector<double> times;                 // t^n, n = 0..N
  std::vector<Eigen::VectorXd> average;      // ensemble average at each t^n
};

/// Second-order BDF ensemble scheme on the full Taylor-Hood space.
///
/// Each step builds one matrix (3/(2dt)) M + nu A + N(<u>^n) shared by all
/// members, factorizes it once and back-substitutes J right-hand sides
///   F^j = (f^j(t^{n+1}), v) + (1/(2dt)) M (4u^{j,n} - u^{j,n-1})
///         - N(u'^{j,n}) (2u^{j,n} - u^{j,n-1}).
class EnsembleFullSolver {
 public:
  EnsembleFullSolver(const TaylorHoodSpace& space, double nu, double dt, std::vector<Forcing> forces);

  int members() const { return static_cast<int>(forces_.size()); }
  double nu() const { return nu_; }
  double dt() const { return dt_; }

  /// One Crank-Nicolson step per member (two Picard iterations on the
  /// convecting field) from u^{j,0}; returns the state at n = 1.
  EnsembleState bootstrap(const std::vector<Eigen::VectorXd>& initial);

  /// Advances the state from n to n + 1.
  void step(EnsembleState& state);

  /// Advances to final_time, recording snapshots every `stride` levels
  /// starting with n = 0.
  FullRunResult run(EnsembleState& state, double final_time, const FullRunOptions& options = {});

  const TaylorHoodSpace& space() const { return space_; }
  const SparseOperator& mass() const { return mass_; }
  const SparseOperator& stiffness() const { return stiffness_; }
  const SparseOperator& divergence() const { return divergence_; }
  const SaddlePointSystem& system() const { return system_; }

  /// Step index the current factorization belongs to (-1 before the first step).
  int factorized_step() const { return factorized_step_; }
  /// Largest ||B u|| / ||u|| seen over all solved members.
  double max_divergence_residual() const { return max_divergence_residual_; }

  /// (f^j(t), v) with caching for autonomous forces.
  const Eigen::VectorXd& load(int member, double t);

 private:
  void check_divergence(const Eigen::VectorXd& u, int step);

  const TaylorHoodSpace& space_;
  double nu_;
  double dt_;
  std::vector<Forcing> forces_;
  SparseOperator mass_;
  SparseOperator stiffness_;
  SparseOperator divergence_;
  SaddlePointSystem system_;
  std::vector<std::optional<Eigen::VectorXd>> load_cache_;
  Eigen::VectorXd scratch_load_;
  int factorized_step_ = -1;
  double max_divergence_residual_ = 0.0;
};

std::vector<TimeseriesRow> timeseries_rows(const TaylorHoodSpace& space,
                                           const std::vector<Eigen::VectorXd>& members,
                                           const Eigen::VectorXd& average, int step, double time,
                                           double nu);

}  // namespace enspod
