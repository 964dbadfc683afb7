#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "semiflow/graph3d.hpp"
#include "semiflow/rng.hpp"

using namespace semiflow;

namespace {

Graph3D random_graph(int n, int d_h, CounterRng& rng, int d_e = 2) {
  Graph3D g;
  g.positions = rng.normal_mat(3, n);
  g.features = rng.normal_mat(d_h, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < 0.5) g.edges.push_back({i, j, rng.normal_vec(d_e)});
  g.globals.push_back(rng.normal_vec(2));
  g.normalize_edges();
  g.validate();
  return g;
}

double max_position_diff(const Graph3D& a, const Graph3D& b) {
  return (a.positions - b.positions).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(RigidTransform, IdentityLeavesGraphUnchanged) {
  CounterRng rng(1);
  const Graph3D g = random_graph(5, 3, rng);
  const Graph3D out = apply_rigid(RigidTransform::identity(), g);
  EXPECT_TRUE(out == g);
}

TEST(RigidTransform, QuarterTurnAboutZ) {
  Graph3D g;
  g.positions.resize(3, 1);
  g.positions.col(0) = Eigen::Vector3d(1, 0, 0);
  g.features.resize(0, 1);
  RigidTransform t;
  const double a = M_PI / 2;
  t.rotation << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  const Graph3D out = apply_rigid(t, g);
  EXPECT_NEAR((out.positions.col(0) - Eigen::Vector3d(0, 1, 0)).norm(), 0, 1e-15);
}

TEST(RigidTransform, NonPositionDataUntouched) {
  CounterRng rng(2);
  const Graph3D g = random_graph(6, 4, rng);
  const Graph3D out = apply_rigid(random_rigid(rng, 2.0), g);
  EXPECT_EQ(out.features, g.features);
  ASSERT_EQ(out.edges.size(), g.edges.size());
  for (std::size_t k = 0; k < g.edges.size(); ++k)
    EXPECT_EQ(out.edges[k].feat, g.edges[k].feat);
  EXPECT_EQ(out.globals, g.globals);
}

TEST(RigidTransform, CompositionLaw) {
  CounterRng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Graph3D g = random_graph(4, 2, rng);
    const RigidTransform t1 = random_rigid(rng, 1.5);
    const RigidTransform t2 = random_rigid(rng, 1.5);
    t1.validate();
    t2.validate();
    const Graph3D lhs = apply_rigid(t2, apply_rigid(t1, g));
    const Graph3D rhs = apply_rigid(t2.compose(t1), g);
    EXPECT_LT(max_position_diff(lhs, rhs), 1e-12);
  }
}

TEST(RigidTransform, ValidateRejectsNonOrthogonal) {
  RigidTransform t;
  t.rotation(0, 1) = 0.5;
  EXPECT_THROW(t.validate(), DomainError);
}

TEST(Permutation, IdentityAndSwap) {
  CounterRng rng(4);
  const Graph3D g = random_graph(2, 2, rng);
  EXPECT_TRUE(apply_perm(Permutation::identity(2), g) == g);

  Permutation swap;
  swap.map = {1, 0};
  const Graph3D out = apply_perm(swap, g);
  EXPECT_EQ(out.positions.col(0), g.positions.col(1));
  EXPECT_EQ(out.positions.col(1), g.positions.col(0));
}

TEST(Permutation, LengthMismatchThrows) {
  CounterRng rng(5);
  const Graph3D g = random_graph(4, 2, rng);
  EXPECT_THROW(apply_perm(Permutation::identity(3), g), SizeError);
}

TEST(Permutation, CompositionByEnumeration) {
  CounterRng rng(6);
  for (int n = 2; n <= 4; ++n) {
    for (int trial = 0; trial < 30; ++trial) {
      const Graph3D g = random_graph(n, 2, rng);
      const Permutation p1 = Permutation::random(n, rng);
      const Permutation p2 = Permutation::random(n, rng);
      const Graph3D lhs = apply_perm(p2, apply_perm(p1, g));
      const Graph3D rhs = apply_perm(p2.compose(p1), g);
      EXPECT_TRUE(lhs == rhs);
    }
  }
}

TEST(Permutation, CommutesWithRigid) {
  CounterRng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Graph3D g = random_graph(5, 3, rng);
    const Permutation p = Permutation::random(5, rng);
    const RigidTransform t = random_rigid(rng, 1.0);
    const Graph3D a = apply_perm(p, apply_rigid(t, g));
    const Graph3D b = apply_rigid(t, apply_perm(p, g));
    EXPECT_LT(max_position_diff(a, b), 1e-12);
    EXPECT_EQ(a.features, b.features);
  }
}

TEST(VertexVector, LayoutDefinition) {
  VertexSet v;
  v.x.resize(3, 1);
  v.x.col(0) = Eigen::Vector3d(1, 2, 3);
  v.h.resize(1, 1);
  v.h(0, 0) = 4;
  const VertexVector vec = vectorize(v);
  Eigen::VectorXd expected(4);
  expected << 1, 2, 3, 4;
  EXPECT_EQ(vec.data, expected);
}

TEST(VertexVector, RoundTripExact) {
  CounterRng rng(8);
  VertexSet v{rng.normal_mat(3, 5), rng.normal_mat(3, 5)};
  const VertexSet back = devectorize(vectorize(v));
  EXPECT_EQ(back.x, v.x);
  EXPECT_EQ(back.h, v.h);
}

TEST(VertexVector, PermutedVectorizeIsBlockPermutation) {
  CounterRng rng(9);
  for (int n = 2; n <= 4; ++n) {
    const int d_h = 2;
    VertexSet v{rng.normal_mat(3, n), rng.normal_mat(d_h, n)};
    const Permutation p = Permutation::random(n, rng);
    const Eigen::VectorXd permuted = vectorize(apply_perm(p, v)).data;
    // Brute-force block rearrangement of vectorize(v).
    const Eigen::VectorXd flat = vectorize(v).data;
    Eigen::VectorXd expected(flat.size());
    for (int i = 0; i < n; ++i) {
      expected.segment(3 * i, 3) = flat.segment(3 * p.map[i], 3);
      expected.segment(3 * n + d_h * i, d_h) =
          flat.segment(3 * n + d_h * p.map[i], d_h);
    }
    EXPECT_EQ(permuted, expected);
  }
}

TEST(VertexVector, ZeroFeatureDimAllowed) {
  CounterRng rng(10);
  VertexSet v{rng.normal_mat(3, 4), Eigen::MatrixXd(0, 4)};
  const VertexVector vec = vectorize(v);
  EXPECT_EQ(vec.data.size(), 12);
  const VertexSet back = devectorize(vec);
  EXPECT_EQ(back.x, v.x);
  EXPECT_EQ(back.h.rows(), 0);
}

TEST(Graph3D, ValidateRejectsBadEdges) {
  CounterRng rng(11);
  Graph3D g = random_graph(4, 2, rng);
  g.edges.push_back({2, 2, Eigen::VectorXd::Zero(2)});
  EXPECT_THROW(g.normalize_edges(), SizeError);
  g.edges.pop_back();
  g.edges.push_back({0, 9, Eigen::VectorXd::Zero(2)});
  EXPECT_THROW(g.validate(), SizeError);
}

TEST(Graph3D, JsonRoundTripIsExact) {
  CounterRng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph3D g = random_graph(rng.uniform_int(1, 6), rng.uniform_int(0, 3), rng);
    const Graph3D back = graph_from_json(to_json_line(g));
    EXPECT_TRUE(back == g) << "trial " << trial;
  }
}

TEST(Graph3D, JsonParseErrors) {
  EXPECT_THROW(graph_from_json("{not json"), ParseError);
  EXPECT_THROW(graph_from_json("{\"n\": 1}"), ParseError);
}

TEST(RandomOrthogonal, IsOrthogonalAndCoversBothDeterminants) {
  CounterRng rng(13);
  bool saw_proper = false;
  bool saw_improper = false;
  for (int i = 0; i < 64; ++i) {
    const Eigen::Matrix3d q = random_orthogonal(rng);
    EXPECT_LT((q.transpose() * q - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(),
              1e-12);
    (q.determinant() > 0 ? saw_proper : saw_improper) = true;
  }
  EXPECT_TRUE(saw_proper);
  EXPECT_TRUE(saw_improper);
  const Eigen::Matrix3d r = random_orthogonal(rng, /*proper_only=*/true);
  EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
}
