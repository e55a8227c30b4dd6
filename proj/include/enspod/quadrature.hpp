#pragma once

#include <array>
#include <vector>

namespace enspod {

/// Triangle quadrature in barycentric coordinates. Weights sum to one, so
/// an integral over triangle T is area(T) * sum_q w_q f(x_q).
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;

  int size() const { return static_cast<int>(weights.size()); }
};

/// Seven-point symmetric rule (Radon), exact for total degree 5.
const QuadratureRule& symmetric_degree5();

/// Conical product (collapsed Gauss-Legendre) rule with n points per
/// direction, exact for total degree 2n - 2.
QuadratureRule collapsed_gauss(int n);

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace enspod
