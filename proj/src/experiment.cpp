#include "enspod/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "enspod/ensemble_rom.hpp"
#include "enspod/error.hpp"
#include "enspod/format.hpp"

#ifndef ENSPOD_DATA_DIR
#define ENSPOD_DATA_DIR "data"
#endif

namespace fs = std::filesystem;

namespace enspod {

fs::path bundled_data_dir() { return fs::path(ENSPOD_DATA_DIR); }

std::shared_ptr<const Mesh> make_mesh(const std::string& source) {
  const std::string prefix = "structured:";
  if (source.rfind(prefix, 0) == 0) {
    const auto n = parse_int(source.substr(prefix.size()));
    if (!n || *n < 1) throw ValidationError("bad structured mesh size in '" + source + "'");
    return std::make_shared<const Mesh>(build_structured_square(static_cast<int>(*n)));
  }
  fs::path path(source);
  if (path.is_relative() && !fs::exists(path) && fs::exists(bundled_data_dir() / path)) {
    path = bundled_data_dir() / path;
  }
  return std::make_shared<const Mesh>(load_mesh(path));
}

Discretization::Discretization(std::shared_ptr<const Mesh> m)
    : mesh(std::move(m)),
      space(std::make_unique<TaylorHoodSpace>(mesh)),
      mass(assemble_mass(*space)),
      stiffness(assemble_stiffness(*space)),
      divergence(assemble_divergence(*space)) {}

namespace {

Forcing base_forcing(const ExperimentConfig& config, double epsilon) {
  if (config.force == "zero") return zero_forcing();
  return offset_circles_forcing(epsilon);
}

fs::path resolve(const fs::path& out, const std::string& file) {
  const fs::path p(file);
  return p.is_absolute() ? p : out / p;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FileError("cannot create " + dir.string() + ": " + ec.message());
}

std::vector<Coefficients> lift_all(const PodBasis& basis, const std::vector<Eigen::VectorXd>& a) {
  std::vector<Coefficients> out;
  out.reserve(a.size());
  for (const auto& v : a) out.push_back(lift(basis, v));
  return out;
}

Eigen::VectorXd mean_of(const std::vector<Eigen::VectorXd>& members) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(members.front().size());
  for (const auto& v : members) sum += v;
  return sum / static_cast<double>(members.size());
}

ReferenceTrajectory find_reference(const fs::path& out, const ExperimentConfig& config, Eigen::Index n_vel) {
  for (const char* name : {"reference_eval.bin", "reference.bin"}) {
    const fs::path p = out / name;
    if (!fs::exists(p)) continue;
    ReferenceTrajectory ref = load_reference(p);
    if (ref.epsilons == config.eval_epsilons && ref.dt == config.dt && !ref.average.empty() &&
        ref.average.front().size() == n_vel) {
      return ref;
    }
  }
  throw ValidationError("no full-model reference for eval_epsilons in " + out.string() +
                        "; run snapshots (same perturbations) or compare first");
}

}  // namespace

Forcing member_forcing(const ExperimentConfig& config, double epsilon) {
  return base_forcing(config, config.perturb_forcing ? epsilon : 0.0);
}

Coefficients initial_condition(const Discretization& d, const ExperimentConfig& config, double epsilon) {
  const Forcing f = base_forcing(config, epsilon);
  return solve_steady_stokes(*d.space, f.at(0.0), config.nu).velocity;
}

MeshReport cmd_mesh_gen(const ExperimentConfig& config, const fs::path& out, std::ostream& log) {
  ensure_dir(out);
  const auto mesh = make_mesh(config.mesh);
  const TaylorHoodSpace space(mesh);
  MeshReport r;
  r.vertices = mesh->n_vertices();
  r.triangles = mesh->n_triangles();
  r.boundary_components = mesh->n_markers();
  r.n_vel = space.n_vel();
  r.n_pr = space.n_pr();
  r.h = mesh->h();
  save_mesh(*mesh, out / "mesh.msh2d");
  write_csv(out / "mesh.csv",
            {"vertices", "triangles", "boundary_components", "n_vel", "n_pr", "total_dofs", "h"},
            {{std::to_string(r.vertices), std::to_string(r.triangles), std::to_string(r.boundary_components),
              std::to_string(r.n_vel), std::to_string(r.n_pr), std::to_string(r.total_dofs()),
              format_double(r.h)}});
  log << "mesh: " << r.vertices << " vertices, " << r.triangles << " triangles, " << r.boundary_components
      << " boundary components, " << r.total_dofs() << " dofs, h = " << r.h << '\n';
  return r;
}

FullEnsembleRun run_full_ensemble(const Discretization& d, const ExperimentConfig& config,
                                  const std::vector<double>& epsilons, int stride) {
  std::vector<Forcing> forces;
  std::vector<Coefficients> initial;
  for (double eps : epsilons) {
    forces.push_back(member_forcing(config, eps));
    initial.push_back(initial_condition(d, config, eps));
  }
  EnsembleFullSolver solver(*d.space, config.nu, config.dt, forces);
  EnsembleState state = solver.bootstrap(initial);

  FullEnsembleRun run;
  run.reference.dt = config.dt;
  run.reference.epsilons = epsilons;
  run.reference.initial = state.previous;
  run.reference.first = state.current;

  const int total = steps_for(config.final_time, config.dt);
  const StabilityMonitor monitor(*d.space, d.stiffness, full_space_stiffness_norm(*d.space, config.nu),
                                 config.dt, config.nu, config.thresholds);
  FullRunOptions options;
  options.snapshot_stride = stride;
  options.observer = [&](const EnsembleState& s) {
    if (s.step >= total) return;
    const auto rows = monitor.evaluate(s.step, compute_mean_fluct(s).fluctuations);
    run.stability.insert(run.stability.end(), rows.begin(), rows.end());
  };
  run.result = solver.run(state, config.final_time, options);
  run.reference.average = run.result.average;
  run.max_divergence = solver.max_divergence_residual();
  return run;
}

FullEnsembleRun cmd_snapshots(const ExperimentConfig& config, const fs::path& out, std::ostream& log) {
  ensure_dir(out);
  const Discretization d(make_mesh(config.mesh));
  log << "snapshots: " << config.snapshot_epsilons.size() << " members, " << d.space->n_vel()
      << " velocity dofs, T = " << config.final_time << '\n';
  FullEnsembleRun run = run_full_ensemble(d, config, config.snapshot_epsilons, config.snapshot_stride);
  save_snapshots(run.result.snapshots, resolve(out, config.snapshot_file));
  save_reference(run.reference, out / "reference.bin");
  write_timeseries_csv(run.result.timeseries, out / "timeseries.csv");
  write_stability_csv(run.stability, out / "stability.csv");
  log << "snapshots: " << run.result.snapshots.per_member << " per member, max divergence residual "
      << run.max_divergence << '\n';
  return run;
}

PodReport cmd_pod(const ExperimentConfig& config, const fs::path& out, std::ostream& log) {
  ensure_dir(out);
  const fs::path snap_path = resolve(out, config.snapshot_file);
  if (!fs::exists(snap_path)) throw FileError("missing snapshot file " + snap_path.string());
  const SnapshotSet snapshots = load_snapshots(snap_path);
  const Discretization d(make_mesh(config.mesh));
  if (snapshots.n_vel() != d.space->n_vel()) throw ValidationError("snapshots do not match the mesh");

  const int r_max = *std::max_element(config.rom_dims.begin(), config.rom_dims.end());
  const PodBasis basis = build_basis(snapshots, d.mass, d.stiffness, r_max);
  save_basis(basis, resolve(out, config.basis_file));
  write_eigenvalues_csv(basis.eigenvalues, basis.rank, out / "eigenvalues.csv");

  PodReport report;
  report.rank = basis.rank;
  report.count = snapshots.count();
  report.eigenvalues = basis.eigenvalues;
  const double scale = basis.eigenvalues.sum() / snapshots.count();
  std::vector<std::vector<std::string>> rows;
  for (int R : config.rom_dims) {
    const TailIdentity l2 = tail_identity_l2(snapshots, basis, d.mass, R);
    const TailIdentity h1 = tail_identity_h1(snapshots, basis, d.mass, d.stiffness, R);
    report.dims.push_back(R);
    report.l2.push_back(l2);
    report.h1.push_back(h1);
    rows.push_back({std::to_string(R), format_double(l2.lhs), format_double(l2.rhs), format_double(h1.lhs),
                    format_double(h1.rhs)});
    log << "pod: R = " << R << " L2 tail " << l2.lhs << " vs " << l2.rhs << ", H1 tail " << h1.lhs << " vs "
        << h1.rhs << '\n';
    if (!l2.holds(1e-8, 1e-14 * scale)) {
      throw NumericalError("L2 tail identity check failed at R = " + std::to_string(R));
    }
  }
  write_csv(out / "tail_identities.csv", {"R", "l2_lhs", "l2_rhs", "h1_lhs", "h1_rhs"}, rows);
  log << "pod: rank " << basis.rank << " of " << snapshots.count() << " snapshots\n";
  return report;
}

std::vector<RomReport> cmd_rom(const ExperimentConfig& config, const fs::path& out, std::ostream& log) {
  ensure_dir(out);
  const Discretization d(make_mesh(config.mesh));
  const fs::path basis_path = resolve(out, config.basis_file);
  if (!fs::exists(basis_path)) throw FileError("missing basis file " + basis_path.string());
  PodBasis full = load_basis(basis_path);
  if (full.n_vel() != d.space->n_vel()) throw ValidationError("basis does not match the mesh");
  attach_stiffness(full, d.stiffness);
  const ReferenceTrajectory ref = find_reference(out, config, d.space->n_vel());

  std::vector<Forcing> forces;
  for (double eps : config.eval_epsilons) forces.push_back(member_forcing(config, eps));
  const int J = static_cast<int>(forces.size());
  const int total = steps_for(config.final_time, config.dt);
  if (static_cast<int>(ref.average.size()) != total + 1) {
    throw ValidationError("reference trajectory length does not match final_time / dt");
  }
  const DualNormSolver dual(*d.space, d.stiffness);

  std::vector<RomReport> reports;
  std::vector<std::pair<int, double>> errors;
  std::vector<std::vector<std::string>> summary;
  for (int R : config.rom_dims) {
    if (R > full.rank) throw RankError("ROM dimension " + std::to_string(R) + " exceeds the basis", full.rank);
    const PodBasis basis = full.truncated(R);
    const ReducedOperators ops = reduce_operators(basis, *d.space, d.stiffness, d.divergence);
    const SpectralNorm sn = stiffness_spectral_norm(basis, d.mass, config.nu);
    ReducedForceProjector projector(*d.space, basis, forces);
    ReducedEnsembleState state = rom_initialize(basis, d.mass, ref.initial, ref.first, config.dt);
    RomStepper stepper(ops, projector, config.nu, config.dt);
    const StabilityMonitor monitor(*d.space, d.stiffness, sn.stiffness_norm, config.dt, config.nu,
                                   config.thresholds);

    RomReport report;
    report.R = R;
    report.s_norm = sn.stiffness_norm;
    std::vector<EnergyBoundTracker> trackers(static_cast<std::size_t>(J), EnergyBoundTracker(config.dt, config.nu));
    for (int j = 0; j < J; ++j) {
      const auto& a0 = state.previous[static_cast<std::size_t>(j)];
      const auto& a1 = state.current[static_cast<std::size_t>(j)];
      trackers[static_cast<std::size_t>(j)].start(a1.squaredNorm(), (2.0 * a1 - a0).squaredNorm());
    }
    std::vector<std::optional<double>> dual_cache(static_cast<std::size_t>(J));
    auto dual_sq = [&](int j, double t) {
      auto& cached = dual_cache[static_cast<std::size_t>(j)];
      if (cached) return *cached;
      const double v = dual(projector.full_load(j, t));
      if (forces[static_cast<std::size_t>(j)].autonomous) cached = v * v;
      return v * v;
    };

    std::vector<TimeseriesRow> series;
    std::vector<StabilityRow> stability;
    std::vector<std::vector<std::string>> coefficient_rows;
    auto observer = [&](const ReducedEnsembleState& s) {
      const int n = s.step;
      const auto members = lift_all(basis, s.current);
      const auto rows = timeseries_rows(*d.space, members, lift(basis, mean_of(s.current)), n, s.time(), config.nu);
      series.insert(series.end(), rows.begin(), rows.end());
      for (int j = 0; j < J; ++j) {
        const auto& a = s.current[static_cast<std::size_t>(j)];
        std::vector<std::string> row{std::to_string(n), std::to_string(j + 1)};
        for (Eigen::Index i = 0; i < a.size(); ++i) row.push_back(format_double(a[i]));
        coefficient_rows.push_back(std::move(row));
        if (n >= 2) {
          const auto& prev = s.previous[static_cast<std::size_t>(j)];
          trackers[static_cast<std::size_t>(j)].advance(a.squaredNorm(), (2.0 * a - prev).squaredNorm(),
                                                        a.dot(ops.stiffness * a), dual_sq(j, s.time()));
        }
      }
      if (n < total) {
        const auto fluct = compute_mean_fluct(s.current, s.previous).fluctuations;
        const auto st = monitor.evaluate(n, lift_all(basis, fluct));
        for (const auto& row : st) {
          report.max_ind41 = std::max(report.max_ind41, row.ind41);
          report.max_ind42 = std::max(report.max_ind42, row.ind42);
          report.all_ok41 = report.all_ok41 && row.ok41;
        }
        stability.insert(stability.end(), st.begin(), st.end());
      }
    };
    const RomRunResult result = rom_run(state, stepper, config.final_time, observer);
    report.rel_error = relative_error_l2t(result.times, ref.average, lift_all(basis, result.average), d.mass);
    std::vector<Coefficients> projected;
    for (const auto& u : ref.average) {
      projected.push_back(project_l2(basis, d.mass, u).lifted);
      const double nu2 = u.dot(d.mass.matrix * u);
      const Coefficients r = u - projected.back();
      if (nu2 > 0.0) {
        report.max_projection_error = std::max(report.max_projection_error, std::sqrt(r.dot(d.mass.matrix * r) / nu2));
      }
    }
    report.projection_error = relative_error_l2t(result.times, ref.average, projected, d.mass);
    for (const auto& t : trackers) {
      report.bound_checked += t.checked();
      report.bound_violations += t.violations();
    }

    const fs::path dir = out / ("rom_R" + std::to_string(R));
    ensure_dir(dir);
    write_timeseries_csv(series, dir / "timeseries.csv");
    write_stability_csv(stability, dir / "stability.csv");
    std::vector<std::string> header{"step", "member"};
    for (int i = 1; i <= R; ++i) header.push_back("a_" + std::to_string(i));
    write_csv(dir / "coefficients.csv", header, coefficient_rows);

    errors.emplace_back(R, report.rel_error);
    summary.push_back({std::to_string(R), format_double(report.rel_error), format_double(report.projection_error),
                       format_double(report.max_projection_error), format_double(report.s_norm),
                       format_double(report.max_ind41), format_double(report.max_ind42),
                       report.all_ok41 ? "1" : "0", std::to_string(report.bound_checked),
                       std::to_string(report.bound_violations)});
    log << "rom: R = " << R << " relative error " << report.rel_error << " (projection " << report.projection_error
        << "), |||S_R||| " << report.s_norm
        << ", max ind41 " << report.max_ind41 << ", bound violations " << report.bound_violations << '\n';
    reports.push_back(report);
  }
  write_errors_csv(errors, out / "errors.csv");
  write_csv(out / "summary.csv",
            {"R", "rel_error", "proj_error", "max_proj_error", "s_norm", "max_ind41", "max_ind42", "all_ok41", "bound_checked", "bound_violations"},
            summary);
  return reports;
}

std::vector<RomReport> cmd_compare(const ExperimentConfig& config, const fs::path& out, std::ostream& log) {
  ensure_dir(out);
  {
    const Discretization d(make_mesh(config.mesh));
    log << "compare: full reference for " << config.eval_epsilons.size() << " members\n";
    const FullEnsembleRun run = run_full_ensemble(d, config, config.eval_epsilons, config.snapshot_stride);
    save_reference(run.reference, out / "reference_eval.bin");
    write_timeseries_csv(run.result.timeseries, out / "timeseries_full.csv");
    write_stability_csv(run.stability, out / "stability_full.csv");
  }
  return cmd_rom(config, out, log);
}

std::vector<ConvergenceRow> cmd_convergence(const ExperimentConfig& config, const fs::path& out,
                                            std::ostream& log) {
  ensure_dir(out);
  const Discretization d(std::make_shared<const Mesh>(build_structured_square(config.convergence_mesh_n)));
  std::vector<ManufacturedFlow> flows;
  for (double s : config.convergence_scales) flows.emplace_back(config.nu, s, config.convergence_omega);

  std::vector<ConvergenceRow> rows;
  double dt = config.convergence_dt0;
  for (int level = 0; level < config.convergence_levels; ++level, dt *= 0.5) {
    std::vector<Forcing> forces;
    std::vector<Coefficients> initial;
    for (const auto& flow : flows) {
      forces.push_back(config.force == "zero" ? zero_forcing() : flow.forcing());
      initial.push_back(config.force == "zero" ? Coefficients(Coefficients::Zero(d.space->n_vel()))
                                               : interpolate(*d.space, flow.velocity_at(0.0)));
    }
    EnsembleFullSolver solver(*d.space, config.nu, dt, forces);
    EnsembleState state = solver.bootstrap(initial);
    const int total = steps_for(config.convergence_final_time, dt);
    while (state.step < total) solver.step(state);
    const double t = state.time();
    double error = 0.0;
    for (std::size_t j = 0; j < flows.size(); ++j) {
      const double e = config.force == "zero"
                           ? norms(*d.space, state.current[j]).l2
                           : l2_error(*d.space, state.current[j], flows[j].velocity_at(t));
      error = std::max(error, e);
    }
    ConvergenceRow row{dt, error, 0.0};
    if (!rows.empty() && error > 0.0 && rows.back().error > 0.0) row.rate = std::log2(rows.back().error / error);
    rows.push_back(row);
    log << "convergence: dt = " << dt << " error " << error << " rate " << row.rate << '\n';
  }
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) cells.push_back({format_double(r.dt), format_double(r.error), format_double(r.rate)});
  write_csv(out / "convergence.csv", {"dt", "error", "rate"}, cells);
  return rows;
}

}  // namespace enspod
