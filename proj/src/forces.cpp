#include "enspod/forces.hpp"

#include <cmath>
#include <numbers>

namespace enspod {

Forcing zero_forcing() {
  return {[](const Point2&, double) { return Vec2{0.0, 0.0}; }, true};
}

Forcing offset_circles_forcing(double epsilon) {
  return {[epsilon](const Point2& p, double) {
            constexpr double k = 3.0 * std::numbers::pi;
            const double r = 1.0 - p.x * p.x - p.y * p.y;
            return Vec2{-4.0 * p.y * r + epsilon * std::sin(k * p.x) * std::sin(k * p.y),
                        4.0 * p.x * r + epsilon * std::cos(k * p.x) * std::cos(k * p.y)};
          },
          true};
}

namespace {

// a(x) = x^2 (1-x)^2 and its derivatives.
struct Profile {
  double a, d1, d2, d3;
  explicit Profile(double x)
      : a(x * x * (1.0 - x) * (1.0 - x)),
        d1(2.0 * x * (1.0 - x) * (1.0 - 2.0 * x)),
        d2(2.0 * (1.0 - 6.0 * x + 6.0 * x * x)),
        d3(12.0 * (2.0 * x - 1.0)) {}
};

}  // namespace

ManufacturedFlow::ManufacturedFlow(double nu, double scale, double omega)
    : nu_(nu), scale_(scale), omega_(omega) {}

Vec2 ManufacturedFlow::velocity(const Point2& p, double t) const {
  const Profile X(p.x), Y(p.y);
  const double g = scale_ * std::cos(omega_ * t);
  return {g * X.a * Y.d1, -g * X.d1 * Y.a};
}

Vec2 ManufacturedFlow::force(const Point2& p, double t) const {
  const Profile X(p.x), Y(p.y);
  const double g = scale_ * std::cos(omega_ * t);
  const double dg = -scale_ * omega_ * std::sin(omega_ * t);
  // Spatial shape U = (a(x) a'(y), -a'(x) a(y)).
  const double u1 = X.a * Y.d1, u2 = -X.d1 * Y.a;
  const double u1x = X.d1 * Y.d1, u1y = X.a * Y.d2;
  const double u2x = -X.d2 * Y.a, u2y = -X.d1 * Y.d1;
  const double lap1 = X.d2 * Y.d1 + X.a * Y.d3;
  const double lap2 = -(X.d3 * Y.a + X.d1 * Y.d2);
  const double adv1 = u1 * u1x + u2 * u1y;
  const double adv2 = u1 * u2x + u2 * u2y;
  return {dg * u1 + g * g * adv1 - nu_ * g * lap1, dg * u2 + g * g * adv2 - nu_ * g * lap2};
}

VectorFunction ManufacturedFlow::velocity_at(double t) const {
  return [self = *this, t](const Point2& p) { return self.velocity(p, t); };
}

Forcing ManufacturedFlow::forcing() const {
  return {[self = *this](const Point2& p, double t) { return self.force(p, t); }, false};
}

}  // namespace enspod
