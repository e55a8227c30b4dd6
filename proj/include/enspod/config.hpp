#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "enspod/diagnostics.hpp"

namespace enspod {

/// Flat key = value experiment description. Lists are comma separated,
/// '#' starts a comment. See README for the key table.
struct ExperimentConfig {
  std::string mesh = "offset_circles_coarse.msh2d";  // path, or structured:N
  double nu = 0.02;
  double dt = 0.01;
  double final_time = 2.0;
  std::vector<double> snapshot_epsilons{0.001, -0.001};
  std::vector<double> eval_epsilons{0.001, -0.001};
  int snapshot_stride = 4;
  std::vector<int> rom_dims{2, 3, 4, 5, 6};
  std::string force = "offset_circles";  // offset_circles | zero
  bool perturb_forcing = false;
  std::string snapshot_file = "snapshots.bin";
  std::string basis_file = "basis.bin";
  StabilityThresholds thresholds;
  std::uint64_t seed = 1;

  double convergence_dt0 = 0.02;
  int convergence_levels = 3;
  int convergence_mesh_n = 32;
  double convergence_final_time = 1.0;
  std::vector<double> convergence_scales{64.0, 48.0};
  double convergence_omega = 2.0;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws ParseError (with line number) on malformed text or unknown keys,
/// ValidationError when the values break the config invariants.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_string(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::string serialize_config(const ExperimentConfig& config);

void validate(const ExperimentConfig& config);

}  // namespace enspod
