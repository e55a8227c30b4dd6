#include "enspod/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "enspod/error.hpp"

namespace enspod {

const QuadratureRule& symmetric_degree5() {
  static const QuadratureRule rule = [] {
    const double s15 = std::sqrt(15.0);
    const double a = (6.0 - s15) / 21.0;
    const double b = (6.0 + s15) / 21.0;
    const double wa = (155.0 - s15) / 1200.0;
    const double wb = (155.0 + s15) / 1200.0;
    QuadratureRule r;
    r.degree = 5;
    r.points = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
                {1.0 - 2.0 * a, a, a}, {a, 1.0 - 2.0 * a, a}, {a, a, 1.0 - 2.0 * a},
                {1.0 - 2.0 * b, b, b}, {b, 1.0 - 2.0 * b, b}, {b, b, 1.0 - 2.0 * b}};
    r.weights = {9.0 / 40.0, wa, wa, wa, wb, wb, wb};
    return r;
  }();
  return rule;
}

void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw InvalidArgument("Gauss-Legendre needs at least one point");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Map [-1, 1] -> [0, 1].
    nodes[n - 1 - i] = 0.5 * (x + 1.0);
    weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

QuadratureRule collapsed_gauss(int n) {
  std::vector<double> x, w;
  gauss_legendre_unit(n, x, w);
  QuadratureRule r;
  r.degree = 2 * n - 2;
  // (s, t) in the unit square -> xi = s, eta = t (1 - s); Jacobian (1 - s);
  // the factor 2 turns reference-area weights into area fractions.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double xi = x[i];
      const double eta = x[j] * (1.0 - x[i]);
      r.points.push_back({1.0 - xi - eta, xi, eta});
      r.weights.push_back(2.0 * w[i] * w[j] * (1.0 - x[i]));
    }
  }
  return r;
}

}  // namespace enspod
