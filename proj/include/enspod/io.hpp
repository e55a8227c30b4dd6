#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "enspod/diagnostics.hpp"
#include "enspod/pod.hpp"

namespace enspod {

// Binary layouts are little-endian: 7-byte magic, int64 header fields,
// float64 payload in column-major order.

/// ENSPOD1: n_vel, J_S, N_S+1, dt, stride, then columns member-major.
void save_snapshots(const SnapshotSet& snapshots, const std::filesystem::path& path);
SnapshotSet load_snapshots(const std::filesystem::path& path);

/// ENSPODB: n_vel, rank, active, count, eigenvalues[count], modes (n_vel x rank).
/// The gradient Gram matrix is not stored; call attach_stiffness after loading.
void save_basis(const PodBasis& basis, const std::filesystem::path& path);
PodBasis load_basis(const std::filesystem::path& path);

/// Full-model ensemble trajectory kept for ROM initialization and comparison.
struct ReferenceTrajectory {
  double dt = 0.0;
  std::vector<double> epsilons;
  std::vector<Coefficients> initial;  // u^{j,0}
  std::vector<Coefficients> first;    // u^{j,1}
  std::vector<Coefficients> average;  // ensemble average at n = 0..N
};

/// ENSPODT: n_vel, levels, J, dt, epsilons[J], initial, first, average.
void save_reference(const ReferenceTrajectory& ref, const std::filesystem::path& path);
ReferenceTrajectory load_reference(const std::filesystem::path& path);

void write_eigenvalues_csv(const Eigen::VectorXd& eigenvalues, int rank, const std::filesystem::path& path);
void write_errors_csv(const std::vector<std::pair<int, double>>& errors, const std::filesystem::path& path);
void write_timeseries_csv(const std::vector<TimeseriesRow>& rows, const std::filesystem::path& path);
void write_stability_csv(const std::vector<StabilityRow>& rows, const std::filesystem::path& path);

/// Writes a CSV with a header row; every row must have header.size() cells.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace enspod
