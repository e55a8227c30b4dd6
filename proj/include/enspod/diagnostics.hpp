#pragma once

#include <Eigen/SparseCholesky>
#include <cmath>
#include <vector>

#include "enspod/assembly.hpp"

namespace enspod {

/// Embedding constant in ||v||_{L6} <= C_se ||grad v||.
inline const double kSobolevConstant = 2.0 / std::sqrt(3.0);

struct EnergyEnstrophy {
  double energy = 0.0;     // 1/2 ||u||^2
  double enstrophy = 0.0;  // 1/2 nu ||curl u||^2
};

EnergyEnstrophy energy_enstrophy(const TaylorHoodSpace& space, const Coefficients& u, double nu);

/// One line of timeseries.csv; member -1 is the ensemble average.
struct TimeseriesRow {
  int step = 0;
  double time = 0.0;
  int member = 0;
  double energy = 0.0;
  double enstrophy = 0.0;
};

struct StabilityThresholds {
  double constant41 = 1.0;  // the unnamed constant C of the gradient condition
  double threshold41 = 1.0;
  double threshold42 = 1.0;

  bool operator==(const StabilityThresholds&) const = default;
};

/// One line of stability.csv.
struct StabilityRow {
  int step = 0;
  int member = 0;
  double ind41 = 0.0;
  double ind42 = 0.0;
  bool ok41 = true;
  bool ok42 = true;
};

/// indicator_41 = C |||S|||^{1/2} (dt/nu) ||grad u'||^2
/// indicator_42 = C_se^2 |||S||| (dt/nu) ||u'||_{L3}^2
StabilityRow stability_indicators(int step, int member, double s_norm, double grad_sq,
                                  double l3_norm, double dt, double nu,
                                  const StabilityThresholds& thresholds);

/// Evaluates both indicators for full-space fluctuation fields. For a POD
/// basis s_norm is |||S_R|||_2 and the fluctuations are lifted reduced
/// fields; for the full space s_norm comes from full_space_stiffness_norm.
class StabilityMonitor {
 public:
  StabilityMonitor(const TaylorHoodSpace& space, const SparseOperator& stiffness, double s_norm,
                   double dt, double nu, StabilityThresholds thresholds = {});

  std::vector<StabilityRow> evaluate(int step, const std::vector<Coefficients>& fluctuations) const;

  double s_norm() const { return s_norm_; }

 private:
  const TaylorHoodSpace& space_;
  const SparseOperator& stiffness_;
  double s_norm_;
  double dt_;
  double nu_;
  StabilityThresholds thresholds_;
};

/// 1 + nu * max over elements of the largest generalized eigenvalue of the
/// element stiffness/mass pair; an upper bound for 1 + nu ||grad v||^2/||v||^2
/// on the finite element space.
double full_space_stiffness_norm(const TaylorHoodSpace& space, double nu);

/// Exact discrete dual norm sup_v (f, v) / ||grad v|| over no-slip fields,
/// i.e. sqrt(F^T A^{-1} F) on the free dofs.
class DualNormSolver {
 public:
  DualNormSolver(const TaylorHoodSpace& space, const SparseOperator& stiffness);
  double operator()(const Coefficients& load) const;

 private:
  std::vector<int> free_dofs_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

/// ||ref - cand||_{2,0} / ||ref||_{2,0}, time integral by the composite
/// trapezoid rule over the given levels. Throws ValidationError on
/// mismatched grids.
double relative_error_l2t(const std::vector<double>& times, const std::vector<Coefficients>& reference,
                          const std::vector<Coefficients>& candidate, const SparseOperator& mass);

/// Tracks the summed energy inequality
///   1/4 ||u^n||^2 + 1/4 ||2u^n - u^{n-1}||^2 + (dt nu / 4) sum ||grad u^{k+1}||^2
///     <= (dt / nu) sum ||f^{k+1}||_{-1}^2 + 1/4 ||u^1||^2 + 1/4 ||2u^1 - u^0||^2
/// step by step for one member.
class EnergyBoundTracker {
 public:
  EnergyBoundTracker(double dt, double nu) : dt_(dt), nu_(nu) {}

  void start(double norm_sq_u1, double norm_sq_extrapolated1);

  /// Feeds level n+1; returns whether the inequality holds at n+1.
  bool advance(double norm_sq, double norm_sq_extrapolated, double grad_sq, double dual_sq_force);

  int checked() const { return checked_; }
  int violations() const { return violations_; }
  double lhs() const { return lhs_; }
  double rhs() const { return rhs_; }
  double max_ratio() const { return max_ratio_; }

 private:
  double dt_;
  double nu_;
  double initial_ = 0.0;
  double dissipation_ = 0.0;
  double forcing_ = 0.0;
  double lhs_ = 0.0;
  double rhs_ = 0.0;
  double max_ratio_ = 0.0;
  int checked_ = 0;
  int violations_ = 0;
};

}  // namespace enspod
