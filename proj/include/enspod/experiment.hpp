#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "enspod/config.hpp"
#include "enspod/ensemble_full.hpp"
#include "enspod/io.hpp"

namespace enspod {

/// "structured:N" builds the unit square; anything else is a .msh2d path,
/// looked up relative to the working directory and then the bundled data
/// directory.
std::shared_ptr<const Mesh> make_mesh(const std::string& source);
std::filesystem::path bundled_data_dir();

/// Mesh, space and the three constant operators shared by every command.
struct Discretization {
  std::shared_ptr<const Mesh> mesh;
  std::unique_ptr<TaylorHoodSpace> space;
  SparseOperator mass;
  SparseOperator stiffness;
  SparseOperator divergence;

  explicit Discretization(std::shared_ptr<const Mesh> m);
};

/// Time-stepping force of one member: the base force, or f_eps when
/// perturb_forcing is set.
Forcing member_forcing(const ExperimentConfig& config, double epsilon);

/// u^{j,0}: steady Stokes solution driven by f_eps.
Coefficients initial_condition(const Discretization& d, const ExperimentConfig& config, double epsilon);

struct MeshReport {
  int vertices = 0;
  int triangles = 0;
  int boundary_components = 0;
  int n_vel = 0;
  int n_pr = 0;
  double h = 0.0;
  int total_dofs() const { return n_vel + n_pr; }
};

struct FullEnsembleRun {
  FullRunResult result;
  ReferenceTrajectory reference;
  std::vector<StabilityRow> stability;
  double max_divergence = 0.0;
};

/// Stokes initial conditions, bootstrap and EnB-full to final_time for the
/// given perturbations.
FullEnsembleRun run_full_ensemble(const Discretization& d, const ExperimentConfig& config,
                                  const std::vector<double>& epsilons, int stride);

struct PodReport {
  int rank = 0;
  int count = 0;
  Eigen::VectorXd eigenvalues;
  std::vector<int> dims;
  std::vector<TailIdentity> l2;
  std::vector<TailIdentity> h1;
};

struct RomReport {
  int R = 0;
  double rel_error = 0.0;
  double projection_error = 0.0;      // same metric for the L2 projection of the reference
  double max_projection_error = 0.0;  // max over t of ||u - P_R u|| / ||u||
  double s_norm = 0.0;
  double max_ind41 = 0.0;
  double max_ind42 = 0.0;
  bool all_ok41 = true;
  int bound_checked = 0;
  int bound_violations = 0;
};

struct ConvergenceRow {
  double dt = 0.0;
  double error = 0.0;
  double rate = 0.0;  // log2(previous error / error); 0 on the first row
};

MeshReport cmd_mesh_gen(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log);
FullEnsembleRun cmd_snapshots(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log);
PodReport cmd_pod(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log);
std::vector<RomReport> cmd_rom(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log);
/// Full reference for eval_epsilons, then the ROM sweep against it.
std::vector<RomReport> cmd_compare(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log);
std::vector<ConvergenceRow> cmd_convergence(const ExperimentConfig& config, const std::filesystem::path& out,
                                            std::ostream& log);

}  // namespace enspod
