#include <doctest.h>

#include <cmath>
#include <limits>

#include "enspod/ensemble_full.hpp"
#include "enspod/error.hpp"
#include "support.hpp"

using namespace enspod;

namespace {

Forcing swirl(double amplitude) {
  return {[amplitude](const Point2& p, double) {
            return Vec2{-amplitude * std::sin(M_PI * p.y), amplitude * std::sin(M_PI * p.x) * (1 + p.y)};
          },
          true};
}

std::vector<Eigen::VectorXd> zeros(const TaylorHoodSpace& space, int J) {
  return std::vector<Eigen::VectorXd>(static_cast<std::size_t>(J), Eigen::VectorXd::Zero(space.n_vel()));
}

}  // namespace

TEST_SUITE("ensemble_full") {

TEST_CASE("mean and fluctuations") {
  testing::Fields f;
  const TaylorHoodSpace space(testing::square(2));
  std::vector<Eigen::VectorXd> cur, prev;
  for (int j = 0; j < 3; ++j) {
    cur.push_back(f.any(space));
    prev.push_back(f.any(space));
  }
  const MeanFluctuation mf = compute_mean_fluct(cur, prev);
  const Eigen::VectorXd expected = ((2 * cur[0] - prev[0]) + (2 * cur[1] - prev[1]) + (2 * cur[2] - prev[2])) / 3.0;
  CHECK((mf.mean - expected).cwiseAbs().maxCoeff() <= 1e-14);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(space.n_vel());
  for (int j = 0; j < 3; ++j) {
    CHECK((mf.fluctuations[j] - (2 * cur[j] - prev[j] - mf.mean)).cwiseAbs().maxCoeff() == 0.0);
    sum += mf.fluctuations[j];
  }
  CHECK(sum.cwiseAbs().maxCoeff() <= 1e-14);

  const MeanFluctuation swapped = compute_mean_fluct({cur[2], cur[0], cur[1]}, {prev[2], prev[0], prev[1]});
  CHECK(swapped.mean == mf.mean);
  CHECK(swapped.fluctuations[0] == mf.fluctuations[2]);
  CHECK(swapped.fluctuations[1] == mf.fluctuations[0]);

  CHECK_THROWS_AS(compute_mean_fluct({}, {}), InvalidArgument);
  CHECK_THROWS_AS(compute_mean_fluct(cur, {prev[0]}), InvalidArgument);
}

TEST_CASE("steps_for") {
  CHECK(steps_for(1.0, 0.1) == 10);
  CHECK(steps_for(2.0, 0.01) == 200);
  CHECK_THROWS_AS(steps_for(0.35, 0.1), InvalidArgument);
  CHECK_THROWS_AS(steps_for(0.0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(steps_for(1.0, 0.0), InvalidArgument);
}

TEST_CASE("zero data stays zero") {
  const TaylorHoodSpace space(testing::square(3));
  EnsembleFullSolver solver(space, 0.1, 0.05, {zero_forcing(), zero_forcing()});
  EnsembleState state = solver.bootstrap(zeros(space, 2));
  CHECK(state.step == 1);
  CHECK(state.current[0].norm() == 0.0);
  const FullRunResult r = solver.run(state, 0.25);
  for (const auto& a : r.average) CHECK(a.norm() == 0.0);
  CHECK(r.times.size() == 6);
}

TEST_CASE("single member reduces to linearly extrapolated BDF2") {
  const TaylorHoodSpace space(testing::square(4));
  const double nu = 0.05, dt = 0.02;
  EnsembleFullSolver solver(space, nu, dt, {swirl(2.0)});
  EnsembleState state = solver.bootstrap(zeros(space, 1));
  for (int k = 0; k < 3; ++k) solver.step(state);

  // Hand-built step from the same two levels.
  const SparseOperator m = assemble_mass(space), a = assemble_stiffness(space), b = assemble_divergence(space);
  SaddlePointSystem system(space, m, a, b);
  const Eigen::VectorXd& un = state.current[0];
  const Eigen::VectorXd& uprev = state.previous[0];
  const SparseOperator n = assemble_convection(space, 2 * un - uprev);
  system.factorize(1.5 / dt, nu, &n);
  const Eigen::VectorXd rhs = load_vector(space, swirl(2.0).at(0.0)) + (0.5 / dt) * (m.matrix * (4 * un - uprev));
  const Eigen::VectorXd expected = system.solve(rhs).velocity;
  solver.step(state);
  CHECK((state.current[0] - expected).norm() <= 1e-12 * expected.norm());
}

TEST_CASE("identical members stay identical") {
  const TaylorHoodSpace space(testing::square(4));
  EnsembleFullSolver solver(space, 0.05, 0.02, {swirl(1.0), swirl(1.0), swirl(1.0)});
  EnsembleState state = solver.bootstrap(zeros(space, 3));
  for (int k = 0; k < 10; ++k) {
    solver.step(state);
    CHECK(state.current[1] == state.current[0]);
    CHECK(state.current[2] == state.current[0]);
  }
  CHECK(state.current[0].norm() > 0.0);
}

TEST_CASE("permuting members permutes the solution") {
  const TaylorHoodSpace space(testing::square(4));
  EnsembleFullSolver s1(space, 0.05, 0.02, {swirl(1.0), swirl(-0.5), swirl(2.0)});
  EnsembleFullSolver s2(space, 0.05, 0.02, {swirl(2.0), swirl(1.0), swirl(-0.5)});
  EnsembleState a = s1.bootstrap(zeros(space, 3));
  EnsembleState b = s2.bootstrap(zeros(space, 3));
  for (int k = 0; k < 5; ++k) {
    s1.step(a);
    s2.step(b);
  }
  CHECK(b.current[0] == a.current[2]);
  CHECK(b.current[1] == a.current[0]);
  CHECK(b.current[2] == a.current[1]);
}

TEST_CASE("one factorization per step") {
  const TaylorHoodSpace space(testing::square(3));
  EnsembleFullSolver solver(space, 0.05, 0.02, {swirl(1.0), swirl(-1.0), swirl(0.3), swirl(0.0)});
  EnsembleState state = solver.bootstrap(zeros(space, 4));
  const int before = solver.system().factorizations();
  for (int k = 0; k < 4; ++k) solver.step(state);
  CHECK(solver.system().factorizations() - before == 4);
  CHECK(solver.factorized_step() == 4);
  CHECK(solver.max_divergence_residual() <= 1e-8);
}

TEST_CASE("run records every stride-th level") {
  const TaylorHoodSpace space(testing::square(3));
  EnsembleFullSolver solver(space, 0.05, 0.1, {swirl(1.0), swirl(2.0)});
  {
    EnsembleState state = solver.bootstrap(zeros(space, 2));
    const FullRunResult r = solver.run(state, 0.2);
    CHECK(r.snapshots.per_member == 3);
    CHECK(r.snapshots.count() == 6);
    CHECK(r.snapshots.columns.col(r.snapshots.column(1, 2)) == state.current[1]);
  }
  {
    EnsembleState state = solver.bootstrap(zeros(space, 2));
    FullRunOptions options;
    options.snapshot_stride = 4;
    int calls = 0;
    options.observer = [&](const EnsembleState&) { ++calls; };
    const FullRunResult r = solver.run(state, 1.0, options);
    CHECK(r.snapshots.per_member == 3);  // n = 0, 4, 8
    CHECK(r.times.size() == 11);
    CHECK(calls == 10);
    CHECK(r.timeseries.size() == 11 * 3);
  }
  EnsembleState stepped = solver.bootstrap(zeros(space, 2));
  solver.step(stepped);
  CHECK_THROWS_AS(solver.run(stepped, 1.0), InvalidArgument);
}

TEST_CASE("non-finite data is a numerical error") {
  const TaylorHoodSpace space(testing::square(3));
  EnsembleFullSolver solver(space, 0.05, 0.1, {swirl(1.0)});
  EnsembleState state = solver.bootstrap(zeros(space, 1));
  state.current[0][space.n_vel() / 2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solver.step(state), NumericalError);
}

TEST_CASE("invalid construction") {
  const TaylorHoodSpace space(testing::square(2));
  CHECK_THROWS_AS(EnsembleFullSolver(space, 0.0, 0.1, {zero_forcing()}), InvalidArgument);
  CHECK_THROWS_AS(EnsembleFullSolver(space, 0.1, -0.1, {zero_forcing()}), InvalidArgument);
  CHECK_THROWS_AS(EnsembleFullSolver(space, 0.1, 0.1, {}), InvalidArgument);
}

TEST_CASE("second order in time on a fixed mesh") {
  // Differences of successive dt halvings cancel the spatial error.
  const TaylorHoodSpace space(testing::square(6));
  const double nu = 0.5, T = 0.4;
  const ManufacturedFlow flow(nu, 64.0, 2.0);
  const SparseOperator m = assemble_mass(space);
  const Eigen::VectorXd u0 = solve_steady_stokes(space, flow.forcing().at(0.0), nu).velocity;
  std::vector<Eigen::VectorXd> finals;
  for (double dt : {0.04, 0.02, 0.01, 0.005}) {
    EnsembleFullSolver solver(space, nu, dt, {flow.forcing(), flow.forcing()});
    EnsembleState state = solver.bootstrap({u0, 0.5 * u0});
    FullRunOptions options;
    options.record_timeseries = false;
    solver.run(state, T, options);
    finals.push_back(state.current[0]);
  }
  std::vector<double> diffs;
  for (std::size_t i = 1; i < finals.size(); ++i) {
    const Eigen::VectorXd d = finals[i] - finals[i - 1];
    diffs.push_back(std::sqrt(d.dot(m.matrix * d)));
  }
  for (std::size_t i = 1; i < diffs.size(); ++i) {
    const double rate = std::log2(diffs[i - 1] / diffs[i]);
    CHECK(rate >= 1.8);
    CHECK(rate <= 2.3);
  }
}

}
