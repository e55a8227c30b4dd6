#pragma once

#include <memory>
#include <random>

#include "enspod/assembly.hpp"
#include "enspod/mesh.hpp"
#include "enspod/taylor_hood.hpp"

namespace testing {

inline std::shared_ptr<const enspod::Mesh> square(int n) {
  return std::make_shared<const enspod::Mesh>(enspod::build_structured_square(n));
}

inline std::shared_ptr<const enspod::Mesh> single_triangle() {
  return std::make_shared<const enspod::Mesh>(std::vector<enspod::Point2>{{0, 0}, {1, 0}, {0, 1}},
                                              std::vector<enspod::Triangle>{{0, 1, 2}});
}

struct Fields {
  explicit Fields(std::uint64_t seed = 12345) : rng(seed) {}

  Eigen::VectorXd any(const enspod::TaylorHoodSpace& space) {
    Eigen::VectorXd v(space.n_vel());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = dist(rng);
    return v;
  }

  /// Random field vanishing on the no-slip boundary.
  Eigen::VectorXd interior(const enspod::TaylorHoodSpace& space) {
    Eigen::VectorXd v = any(space);
    for (int d : space.dirichlet_dofs()) v[d] = 0.0;
    return v;
  }

  std::mt19937_64 rng;
  std::uniform_real_distribution<double> dist{-1.0, 1.0};
};

inline double m_dot(const enspod::SparseOperator& m, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.dot(m.matrix * b);
}

}  // namespace testing
