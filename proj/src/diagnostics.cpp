#include "enspod/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <limits>

#include "enspod/error.hpp"
#include "enspod/quadrature.hpp"

namespace enspod {

EnergyEnstrophy energy_enstrophy(const TaylorHoodSpace& space, const Coefficients& u, double nu) {
  const auto& rule = symmetric_degree5();
  double l2 = 0.0, curl = 0.0;
  for (int t = 0; t < space.mesh().n_triangles(); ++t) {
    const double area = space.geometry(t).area;
    for (int q = 0; q < rule.size(); ++q) {
      const PointValue uq = evaluate(space, u, t, rule.points[q]);
      const double w = area * rule.weights[q];
      const double c = uq.grad[1][0] - uq.grad[0][1];
      l2 += w * (uq.value[0] * uq.value[0] + uq.value[1] * uq.value[1]);
      curl += w * c * c;
    }
  }
  return {0.5 * l2, 0.5 * nu * curl};
}

StabilityRow stability_indicators(int step, int member, double s_norm, double grad_sq,
                                  double l3_norm, double dt, double nu,
                                  const StabilityThresholds& thresholds) {
  StabilityRow row;
  row.step = step;
  row.member = member;
  row.ind41 = thresholds.constant41 * std::sqrt(s_norm) * (dt / nu) * grad_sq;
  row.ind42 = kSobolevConstant * kSobolevConstant * s_norm * (dt / nu) * l3_norm * l3_norm;
  row.ok41 = row.ind41 <= thresholds.threshold41;
  row.ok42 = row.ind42 <= thresholds.threshold42;
  return row;
}

StabilityMonitor::StabilityMonitor(const TaylorHoodSpace& space, const SparseOperator& stiffness,
                                   double s_norm, double dt, double nu,
                                   StabilityThresholds thresholds)
    : space_(space), stiffness_(stiffness), s_norm_(s_norm), dt_(dt), nu_(nu),
      thresholds_(thresholds) {}

std::vector<StabilityRow> StabilityMonitor::evaluate(
    int step, const std::vector<Coefficients>& fluctuations) const {
  std::vector<StabilityRow> rows;
  rows.reserve(fluctuations.size());
  for (std::size_t j = 0; j < fluctuations.size(); ++j) {
    const Coefficients& f = fluctuations[j];
    const double grad_sq = f.dot(stiffness_.matrix * f);
    const double l3 = norms(space_, f).l3;
    rows.push_back(stability_indicators(step, static_cast<int>(j), s_norm_, std::max(grad_sq, 0.0),
                                        l3, dt_, nu_, thresholds_));
  }
  return rows;
}

double full_space_stiffness_norm(const TaylorHoodSpace& space, double nu) {
  const auto& rule = symmetric_degree5();
  double largest = 0.0;
  for (int t = 0; t < space.mesh().n_triangles(); ++t) {
    const auto& geo = space.geometry(t);
    Eigen::Matrix<double, 6, 6> mass = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 6> stiff = Eigen::Matrix<double, 6, 6>::Zero();
    for (int q = 0; q < rule.size(); ++q) {
      const auto phi = P2Basis::values(rule.points[q]);
      const auto g = P2Basis::gradients(rule.points[q], geo.grad_bary);
      const double w = geo.area * rule.weights[q];
      for (int a = 0; a < 6; ++a) {
        for (int b = 0; b < 6; ++b) {
          mass(a, b) += w * phi[a] * phi[b];
          stiff(a, b) += w * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
        }
      }
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(stiff, mass,
                                                                              Eigen::EigenvaluesOnly);
    largest = std::max(largest, eig.eigenvalues().maxCoeff());
  }
  return 1.0 + nu * largest;
}

DualNormSolver::DualNormSolver(const TaylorHoodSpace& space, const SparseOperator& stiffness) {
  std::vector<int> index(static_cast<std::size_t>(space.n_vel()), -1);
  for (int d = 0; d < space.n_vel(); ++d) {
    if (!space.is_dirichlet(d)) {
      index[d] = static_cast<int>(free_dofs_.size());
      free_dofs_.push_back(d);
    }
  }
  std::vector<Eigen::Triplet<double>> entries;
  for (int col = 0; col < stiffness.matrix.outerSize(); ++col) {
    if (index[col] < 0) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(stiffness.matrix, col); it; ++it) {
      const int row = index[it.row()];
      if (row >= 0) entries.emplace_back(row, index[col], it.value());
    }
  }
  const auto n = static_cast<Eigen::Index>(free_dofs_.size());
  Eigen::SparseMatrix<double> reduced(n, n);
  reduced.setFromTriplets(entries.begin(), entries.end());
  solver_.compute(reduced);
  if (solver_.info() != Eigen::Success) throw SolverError("stiffness factorization failed");
}

double DualNormSolver::operator()(const Coefficients& load) const {
  Eigen::VectorXd f(static_cast<Eigen::Index>(free_dofs_.size()));
  for (std::size_t i = 0; i < free_dofs_.size(); ++i) f[static_cast<Eigen::Index>(i)] = load[free_dofs_[i]];
  const Eigen::VectorXd x = solver_.solve(f);
  return std::sqrt(std::max(f.dot(x), 0.0));
}

double relative_error_l2t(const std::vector<double>& times, const std::vector<Coefficients>& reference,
                          const std::vector<Coefficients>& candidate, const SparseOperator& mass) {
  if (times.size() != reference.size() || times.size() != candidate.size()) {
    throw ValidationError("trajectory lengths do not match the time grid");
  }
  if (times.size() < 2) throw ValidationError("need at least two time levels");
  double err = 0.0, ref = 0.0;
  auto sq = [&](const Coefficients& v) { return v.dot(mass.matrix * v); };
  double prev_err = 0.0, prev_ref = 0.0;
  for (std::size_t n = 0; n < times.size(); ++n) {
    if (reference[n].size() != candidate[n].size()) throw ValidationError("field length mismatch");
    const double e = sq(reference[n] - candidate[n]);
    const double r = sq(reference[n]);
    if (n > 0) {
      const double dt = times[n] - times[n - 1];
      if (!(dt > 0.0)) throw ValidationError("time grid is not increasing");
      err += 0.5 * dt * (prev_err + e);
      ref += 0.5 * dt * (prev_ref + r);
    }
    prev_err = e;
    prev_ref = r;
  }
  if (ref == 0.0) return err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(err / ref);
}

void EnergyBoundTracker::start(double norm_sq_u1, double norm_sq_extrapolated1) {
  initial_ = 0.25 * norm_sq_u1 + 0.25 * norm_sq_extrapolated1;
  dissipation_ = 0.0;
  forcing_ = 0.0;
  lhs_ = rhs_ = initial_;
}

bool EnergyBoundTracker::advance(double norm_sq, double norm_sq_extrapolated, double grad_sq,
                                 double dual_sq_force) {
  dissipation_ += 0.25 * dt_ * nu_ * grad_sq;
  forcing_ += (dt_ / nu_) * dual_sq_force;
  lhs_ = 0.25 * norm_sq + 0.25 * norm_sq_extrapolated + dissipation_;
  rhs_ = forcing_ + initial_;
  ++checked_;
  if (rhs_ > 0.0) max_ratio_ = std::max(max_ratio_, lhs_ / rhs_);
  const bool ok = lhs_ <= rhs_ * (1.0 + 1e-12) + 1e-300;
  if (!ok) ++violations_;
  return ok;
}

}  // namespace enspod
