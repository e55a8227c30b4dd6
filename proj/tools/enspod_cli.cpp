#include <CLI11.hpp>
#include <iostream>

#include "enspod/error.hpp"
#include "enspod/experiment.hpp"

namespace {

int exit_code(const std::exception& e) {
  if (dynamic_cast<const enspod::NumericalError*>(&e) || dynamic_cast<const enspod::SolverError*>(&e) ||
      dynamic_cast<const enspod::RankError*>(&e)) {
    return 3;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble BDF2 Navier-Stokes solver with a POD reduced-order model"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"mesh-gen", "Load or generate the configured mesh and write it with size statistics"},
      {"snapshots", "Run the full ensemble and store snapshots and the reference trajectory"},
      {"pod", "Build the POD basis and eigenvalue report from stored snapshots"},
      {"rom", "Run the reduced ensemble for every R and compare against the full reference"},
      {"compare", "Run the full ensemble for eval_epsilons, then the ROM sweep against it"},
      {"convergence", "Temporal convergence study on the manufactured solution"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Experiment config file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const enspod::ExperimentConfig config =
        config_path.empty() ? enspod::ExperimentConfig{} : enspod::load_config(config_path);
    enspod::validate(config);
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "mesh-gen") enspod::cmd_mesh_gen(config, out_dir, std::cout);
    else if (name == "snapshots") enspod::cmd_snapshots(config, out_dir, std::cout);
    else if (name == "pod") enspod::cmd_pod(config, out_dir, std::cout);
    else if (name == "rom") enspod::cmd_rom(config, out_dir, std::cout);
    else if (name == "compare") enspod::cmd_compare(config, out_dir, std::cout);
    else if (name == "convergence") enspod::cmd_convergence(config, out_dir, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  }
  return 0;
}
