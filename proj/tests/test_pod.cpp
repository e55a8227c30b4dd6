#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "enspod/error.hpp"
#include "enspod/pod.hpp"
#include "support.hpp"

using namespace enspod;

namespace {

struct Fixture {
  TaylorHoodSpace space{testing::square(3)};
  SparseOperator mass = assemble_mass(space);
  SparseOperator stiffness = assemble_stiffness(space);
  testing::Fields fields{2024};

  SnapshotSet random_set(int members, int per_member) {
    SnapshotSet s;
    s.members = members;
    s.per_member = per_member;
    s.dt = 0.1;
    s.columns.resize(space.n_vel(), members * per_member);
    for (int c = 0; c < s.count(); ++c) s.columns.col(c) = fields.interior(space);
    return s;
  }

  /// Snapshots spanning a rank-r subspace with decaying weights.
  SnapshotSet low_rank_set(int rank, int count) {
    Eigen::MatrixXd generators(space.n_vel(), rank);
    for (int i = 0; i < rank; ++i) generators.col(i) = fields.interior(space) * std::pow(0.3, i);
    SnapshotSet s;
    s.members = 1;
    s.per_member = count;
    s.dt = 0.1;
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd mix(rank, count);
    for (int i = 0; i < rank; ++i)
      for (int c = 0; c < count; ++c) mix(i, c) = normal(rng);
    s.columns = generators * mix;
    return s;
  }

  double mdot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const { return a.dot(mass.matrix * b); }
};

}  // namespace

TEST_SUITE("pod") {

TEST_CASE("correlation matrix") {
  Fixture fx;
  const SnapshotSet one = fx.random_set(1, 1);
  const Eigen::MatrixXd c1 = correlation_matrix(one, fx.mass);
  CHECK(c1.rows() == 1);
  CHECK(std::abs(c1(0, 0) - fx.mdot(one.columns.col(0), one.columns.col(0))) <= 1e-14 * c1(0, 0));

  const SnapshotSet set = fx.random_set(2, 4);
  const Eigen::MatrixXd c = correlation_matrix(set, fx.mass);
  CHECK((c - c.transpose()).cwiseAbs().maxCoeff() == 0.0);
  double trace = 0.0;
  for (int i = 0; i < set.count(); ++i) trace += fx.mdot(set.columns.col(i), set.columns.col(i));
  CHECK(std::abs(c.trace() - trace) <= 1e-12 * trace);
}

TEST_CASE("duplicated snapshot gives a rank one basis") {
  Fixture fx;
  SnapshotSet s = fx.random_set(1, 2);
  s.columns.col(1) = s.columns.col(0);
  const PodBasis b = build_basis(s, fx.mass, fx.stiffness, 1);
  CHECK(b.rank == 1);
  const double n2 = fx.mdot(s.columns.col(0), s.columns.col(0));
  CHECK(std::abs(b.eigenvalues[0] - 2 * n2) <= 1e-12 * n2);
  CHECK(std::abs(b.eigenvalues[1]) <= 1e-12 * n2);
  CHECK(std::abs(fx.mdot(b.modes.col(0), b.modes.col(0)) - 1.0) <= 1e-12);
  CHECK_THROWS_AS(build_basis(s, fx.mass, fx.stiffness, 2), RankError);
}

TEST_CASE("orthogonal snapshots are their own modes") {
  Fixture fx;
  const Eigen::VectorXd x = fx.fields.interior(fx.space);
  Eigen::VectorXd y = fx.fields.interior(fx.space);
  y -= fx.mdot(x, y) / fx.mdot(x, x) * x;
  SnapshotSet s;
  s.members = 1;
  s.per_member = 2;
  s.columns.resize(fx.space.n_vel(), 2);
  s.columns.col(0) = x / std::sqrt(fx.mdot(x, x));        // norm 1
  s.columns.col(1) = 2.0 * y / std::sqrt(fx.mdot(y, y));  // norm 2
  const PodBasis b = build_basis(s, fx.mass, fx.stiffness, 2);
  CHECK(std::abs(b.eigenvalues[0] - 4.0) <= 1e-12);
  CHECK(std::abs(b.eigenvalues[1] - 1.0) <= 1e-12);
  CHECK((b.modes.col(0) - 0.5 * s.columns.col(1)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((b.modes.col(1) - s.columns.col(0)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("basis matches the correlation eigenproblem") {
  Fixture fx;
  const SnapshotSet s = fx.random_set(2, 10);
  const PodBasis b = build_basis(s, fx.mass, fx.stiffness, 6);
  CHECK(b.rank == 20);
  CHECK(b.active == 6);

  // Dense oracle: C = A^T M A, C a = lambda a, phi = A a / sqrt(lambda).
  const Eigen::MatrixXd c = s.columns.transpose() * (Eigen::MatrixXd(fx.mass.matrix) * s.columns);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
  for (int i = 0; i < 20; ++i) {
    const double lambda = eig.eigenvalues()[19 - i];
    CHECK(std::abs(b.eigenvalues[i] - lambda) <= 1e-10 * b.eigenvalues[0]);
    const Eigen::VectorXd phi = s.columns * eig.eigenvectors().col(19 - i) / std::sqrt(lambda);
    CHECK(std::abs(std::abs(fx.mdot(phi, b.modes.col(i))) - 1.0) <= 1e-8);
  }
  for (int i = 0; i < b.rank; ++i) {
    for (int j = 0; j < b.rank; ++j) {
      CHECK(std::abs(fx.mdot(b.modes.col(i), b.modes.col(j)) - (i == j ? 1.0 : 0.0)) <= 1e-10);
    }
  }
  // Gram matrix of gradients.
  const Eigen::MatrixXd gram = b.modes.transpose() * (fx.stiffness.matrix * b.modes);
  CHECK((b.gradient_gram - gram).cwiseAbs().maxCoeff() <= 1e-10 * gram.cwiseAbs().maxCoeff());
  CHECK_THROWS_AS(build_basis(s, fx.mass, fx.stiffness, 21), RankError);
  CHECK_THROWS_AS(b.truncated(21), RankError);
  CHECK(b.truncated(20).active == 20);
  CHECK(b.truncated(3).active == 3);
}

TEST_CASE("sign convention is deterministic") {
  Fixture fx;
  const SnapshotSet s = fx.random_set(1, 6);
  SnapshotSet negated = s;
  negated.columns = -s.columns;
  const PodBasis a = build_basis(s, fx.mass, fx.stiffness, 3);
  const PodBasis b = build_basis(negated, fx.mass, fx.stiffness, 3);
  CHECK((a.modes + b.modes).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("L2 projection") {
  Fixture fx;
  const SnapshotSet s = fx.random_set(1, 8);
  const PodBasis b = build_basis(s, fx.mass, fx.stiffness, 8);
  for (int c = 0; c < 8; ++c) {
    const Projection p = project_l2(b, fx.mass, s.columns.col(c));
    CHECK((p.lifted - s.columns.col(c)).norm() <= 1e-9 * s.columns.col(c).norm());
  }
  const PodBasis b3 = b.truncated(3);
  const Eigen::VectorXd u = fx.fields.interior(fx.space);
  const Projection p = project_l2(b3, fx.mass, u);
  const Eigen::VectorXd r = u - p.lifted;
  for (int i = 0; i < 3; ++i) CHECK(std::abs(fx.mdot(r, b3.modes.col(i))) <= 1e-12 * std::sqrt(fx.mdot(u, u)));
  CHECK(std::abs(fx.mdot(u, u) - fx.mdot(p.lifted, p.lifted) - fx.mdot(r, r)) <= 1e-12 * fx.mdot(u, u));
  const Projection again = project_l2(b3, fx.mass, p.lifted);
  CHECK((again.coefficients - p.coefficients).norm() <= 1e-12 * p.coefficients.norm());
  CHECK((lift(b3, p.coefficients) - p.lifted).norm() == 0.0);

  // Field orthogonal to the basis projects to zero.
  const Projection zero = project_l2(b3, fx.mass, r);
  CHECK(zero.coefficients.norm() <= 1e-12 * std::sqrt(fx.mdot(u, u)));
}

TEST_CASE("L2 tail identity") {
  Fixture fx;
  for (const SnapshotSet& s : {fx.random_set(2, 6), fx.random_set(3, 5), fx.low_rank_set(4, 9)}) {
    const PodBasis b = build_basis(s, fx.mass, fx.stiffness, 1);
    for (int R = 0; R <= b.rank; ++R) {
      const TailIdentity t = tail_identity_l2(s, b, fx.mass, R);
      CHECK(t.holds(1e-8, 1e-14 * b.eigenvalues[0]));
      if (R == b.rank) CHECK(t.lhs <= 1e-12 * b.eigenvalues[0]);
    }
    const TailIdentity all = tail_identity_l2(s, b, fx.mass, 0);
    CHECK(std::abs(all.rhs - correlation_matrix(s, fx.mass).trace() / s.count()) <= 1e-12 * all.rhs);
  }
}

TEST_CASE("H1 tail identity") {
  Fixture fx;
  for (const SnapshotSet& s : {fx.random_set(2, 6), fx.low_rank_set(2, 7)}) {
    const PodBasis b = build_basis(s, fx.mass, fx.stiffness, 1);
    double previous = std::numeric_limits<double>::infinity();
    for (int R = 0; R <= b.rank; ++R) {
      const TailIdentity t = tail_identity_h1(s, b, fx.mass, fx.stiffness, R);
      CHECK(t.holds(1e-8, 1e-14 * b.eigenvalues[0] * b.gradient_gram.diagonal().maxCoeff()));
      CHECK(t.rhs <= previous);
      previous = t.rhs;
    }
  }
}

TEST_CASE("TailIdentity tolerance") {
  CHECK(TailIdentity{1.0, 1.0 + 1e-9}.holds(1e-8, 1e-14));
  CHECK_FALSE(TailIdentity{1.0, 1.1}.holds(1e-8, 1e-14));
  CHECK(TailIdentity{1e-16, 0.0}.holds(1e-8, 1e-14));
  CHECK_FALSE(TailIdentity{1e-10, 0.0}.holds(1e-8, 1e-14));
}

TEST_CASE("power iteration") {
  Eigen::MatrixXd d = Eigen::Vector4d(1.0, 7.0, 3.0, 2.0).asDiagonal();
  CHECK(std::abs(symmetric_power_iteration(d, 1e-10, 10000) - 7.0) <= 1e-8);
  Eigen::MatrixXd one(1, 1);
  one(0, 0) = 2.5;
  CHECK(symmetric_power_iteration(one, 1e-10, 10000) == doctest::Approx(2.5));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(12, 12);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) g(i, j) = normal(rng);
  const Eigen::MatrixXd spd = g * g.transpose();
  const double exact = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(spd).eigenvalues().maxCoeff();
  CHECK(std::abs(symmetric_power_iteration(spd, 1e-12, 10000) - exact) <= 1e-8 * exact);
}

TEST_CASE("spectral norm of S_R and the inverse inequality") {
  Fixture fx;
  const double nu = 0.02;
  const SnapshotSet s = fx.random_set(2, 6);
  const PodBasis b = build_basis(s, fx.mass, fx.stiffness, 5);
  const SpectralNorm n = stiffness_spectral_norm(b, fx.mass, nu);
  CHECK(std::abs(n.mass_norm - 1.0) <= 1e-10);
  const Eigen::MatrixXd sr = b.reduced_stiffness_plus_mass(nu);
  const double exact = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sr).eigenvalues().maxCoeff();
  CHECK(std::abs(n.stiffness_norm - exact) <= 1e-7 * exact);

  const SpectralNorm n1 = stiffness_spectral_norm(b.truncated(1), fx.mass, nu);
  CHECK(std::abs(n1.stiffness_norm - (1.0 + nu * b.gradient_gram(0, 0))) <= 1e-10 * n1.stiffness_norm);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd c(5);
    for (int i = 0; i < 5; ++i) c[i] = normal(rng);
    const Eigen::VectorXd v = lift(b, c);
    const double l2 = fx.mdot(v, v), h1 = v.dot(fx.stiffness.matrix * v);
    CHECK(l2 + nu * h1 <= n.stiffness_norm * l2 * (1 + 1e-7));
  }
}

}
