#pragma once

#include <functional>

#include "enspod/assembly.hpp"

namespace enspod {

/// Body force f(x, t). Autonomous forces have cached load vectors.
struct Forcing {
  std::function<Vec2(const Point2&, double)> f;
  bool autonomous = true;

  VectorFunction at(double t) const {
    return [fn = f, t](const Point2& p) { return fn(p, t); };
  }
};

Forcing zero_forcing();

/// Counterclockwise rotational drive (-4y(1-x^2-y^2), 4x(1-x^2-y^2)) plus
/// epsilon (sin 3 pi x sin 3 pi y, cos 3 pi x cos 3 pi y).
Forcing offset_circles_forcing(double epsilon);

/// Outer disk radius 1 at the origin; inner hole radius 0.1 at (0.5, 0).
struct OffsetCircles {
  static constexpr double outer_radius = 1.0;
  static constexpr double inner_radius = 0.1;
  static constexpr double inner_center_x = 0.5;
  static constexpr double inner_center_y = 0.0;
};

/// Manufactured Navier-Stokes solution on the unit square:
/// u = g(t) * curl(s psi), psi = x^2 (1-x)^2 y^2 (1-y)^2, p = 0,
/// g(t) = cos(omega t). Vanishes on the boundary and is divergence free.
class ManufacturedFlow {
 public:
  ManufacturedFlow(double nu, double scale = 64.0, double omega = 2.0);

  Vec2 velocity(const Point2& p, double t) const;
  Vec2 force(const Point2& p, double t) const;

  VectorFunction velocity_at(double t) const;
  Forcing forcing() const;

 private:
  double nu_;
  double scale_;
  double omega_;
};

}  // namespace enspod
