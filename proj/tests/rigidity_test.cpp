// Copyright 2026 The enclose Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "enclose/presets.hpp"
#include "enclose/rigidity.hpp"

namespace enclose {
namespace {

const std::vector<double> kFiveAgentAngles{65.0, 75.0, 75.0, 80.0};

std::vector<Vec2> random_coords(std::mt19937_64& rng, int n_vertices) {
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<Vec2> c(n_vertices);
  for (Vec2& p : c) p = Vec2(u(rng), u(rng));
  return c;
}

TEST(SensingGraph, CanonicalEdgeOrder) {
  const SensingGraph g(4);
  ASSERT_EQ(g.n_edges(), 7);
  const std::vector<Edge> expected{{1, 2}, {2, 3}, {3, 4}, {1, 0}, {2, 0}, {3, 0}, {4, 0}};
  EXPECT_EQ(g.edges(), expected);
  EXPECT_EQ(g.chain_edge(2), 1);
  EXPECT_EQ(g.radial_edge(1), 3);
  EXPECT_EQ(g.column_of(0), 8);
  EXPECT_EQ(g.column_of(3), 4);
  EXPECT_EQ(g.edge_label(4), "2_0");
  EXPECT_THROW(SensingGraph(0), InvalidParameter);
}

TEST(HennebergBuild, FiveAgentDistances) {
  const DesiredFramework fw = henneberg_build(5.0, kFiveAgentAngles);
  ASSERT_EQ(fw.desired_distances.size(), 9u);
  const double chain[] = {5.373, 6.0876, 6.0876, 6.4279};
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(fw.desired_distances[k], chain[k], 5e-4) << k;
  for (int k = 4; k < 9; ++k) EXPECT_DOUBLE_EQ(fw.desired_distances[k], 5.0);
  EXPECT_DOUBLE_EQ(fw.separation_deg.back(), 65.0);
}

TEST(HennebergBuild, CoordinatesRealiseDistances) {
  const DesiredFramework fw = henneberg_build(5.0, kFiveAgentAngles);
  EXPECT_TRUE(fw.coordinates[0].isZero());
  EXPECT_DOUBLE_EQ(fw.coordinates[1].x(), 5.0);
  EXPECT_DOUBLE_EQ(fw.coordinates[1].y(), 0.0);
  for (int k = 0; k < fw.graph.n_edges(); ++k) {
    const Edge& e = fw.graph.edge(k);
    EXPECT_NEAR((fw.coordinates[e.i] - fw.coordinates[e.j]).norm(), fw.desired_distances[k], 1e-9);
  }
  for (int i = 1; i <= 5; ++i) EXPECT_NEAR(fw.coordinates[i].norm(), 5.0, 1e-12);
}

TEST(HennebergBuild, EquilateralTriangle) {
  const DesiredFramework fw = henneberg_build(1.0, std::vector<double>{60.0});
  ASSERT_EQ(fw.graph.n_edges(), 3);
  for (double d : fw.desired_distances) EXPECT_NEAR(d, 1.0, 1e-15);
}

TEST(HennebergBuild, RejectsBadInput) {
  EXPECT_THROW(henneberg_build(5.0, std::vector<double>{65, 75, 75, 170}), AngleOutOfRange);
  EXPECT_THROW(henneberg_build(5.0, std::vector<double>{0.0, 90.0}), AngleOutOfRange);
  EXPECT_THROW(henneberg_build(5.0, std::vector<double>{180.0}), AngleOutOfRange);
  // closing angle exactly 180
  EXPECT_THROW(henneberg_build(5.0, std::vector<double>{90.0, 90.0}), AngleOutOfRange);
  EXPECT_THROW(henneberg_build(0.0, std::vector<double>{60.0}), NonpositiveRadius);
  EXPECT_THROW(henneberg_build(-1.0, std::vector<double>{60.0}), NonpositiveRadius);
  EXPECT_THROW(henneberg_build(1.0, std::vector<double>{}), InvalidParameter);
}

TEST(EdgeFunction, SingleEdge) {
  const SensingGraph g(1);
  const std::vector<Vec2> c{Vec2(0, 0), Vec2(1, 0)};
  const Eigen::VectorXd phi = edge_function(c, g);
  ASSERT_EQ(phi.size(), 1);
  EXPECT_DOUBLE_EQ(phi(0), 1.0);
}

TEST(EdgeFunction, SquaresDesiredDistances) {
  const DesiredFramework fw = henneberg_build(5.0, kFiveAgentAngles);
  const Eigen::VectorXd phi = edge_function(fw.coordinates, fw.graph);
  EXPECT_NEAR(phi(0), 28.869, 5e-3);
  for (int k = 0; k < 9; ++k) {
    EXPECT_NEAR(phi(k), fw.desired_distances[k] * fw.desired_distances[k], 1e-9);
  }
}

TEST(EdgeFunction, TranslationInvariantAndChecksDimensions) {
  std::mt19937_64 rng(7);
  const SensingGraph g(4);
  std::vector<Vec2> c = random_coords(rng, 5);
  const Eigen::VectorXd before = edge_function(c, g);
  for (Vec2& p : c) p += Vec2(3.25, -1.5);
  EXPECT_LT((edge_function(c, g) - before).cwiseAbs().maxCoeff(), 1e-12);
  c.pop_back();
  EXPECT_THROW(edge_function(c, g), DimensionMismatch);
  EXPECT_THROW(rigidity_matrix(c, g), DimensionMismatch);
}

TEST(RigidityMatrix, SingleEdgeRow) {
  const SensingGraph g(1);
  const std::vector<Vec2> c{Vec2(0, 0), Vec2(1, 0)};
  const Eigen::MatrixXd r = rigidity_matrix(c, g);
  ASSERT_EQ(r.rows(), 1);
  ASSERT_EQ(r.cols(), 4);
  // columns are [p_1, p_0]: p_10 = (1, 0)
  EXPECT_EQ(r(0, 0), 1.0);
  EXPECT_EQ(r(0, 1), 0.0);
  EXPECT_EQ(r(0, 2), -1.0);
  EXPECT_EQ(r(0, 3), 0.0);
}

TEST(RigidityMatrix, RowStructure) {
  std::mt19937_64 rng(11);
  const SensingGraph g(5);
  const std::vector<Vec2> c = random_coords(rng, 6);
  const Eigen::MatrixXd r = rigidity_matrix(c, g);
  for (int k = 0; k < g.n_edges(); ++k) {
    const Edge& e = g.edge(k);
    const Vec2 p = c[e.i] - c[e.j];
    for (int v = 0; v <= 5; ++v) {
      const Eigen::Vector2d block = r.block<1, 2>(k, g.column_of(v)).transpose();
      if (v == e.i) {
        EXPECT_TRUE(block.isApprox(p));
      } else if (v == e.j) {
        EXPECT_TRUE(block.isApprox(-p));
      } else {
        EXPECT_TRUE(block.isZero(0.0));
      }
    }
  }
}

TEST(RigidityMatrix, KillsRigidTranslations) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int n = 2; n <= 8; ++n) {
    const SensingGraph g(n);
    const Eigen::MatrixXd r = rigidity_matrix(random_coords(rng, n + 1), g);
    for (int trial = 0; trial < 100; ++trial) {
      const Vec2 v(u(rng), u(rng));
      const Eigen::VectorXd ones_v = v.replicate(n + 1, 1);
      EXPECT_LT((r * ones_v).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

// Central differences of the edge function against 2 R.
TEST(RigidityMatrix, MatchesFiniteDifferenceJacobian) {
  std::mt19937_64 rng(17);
  const double h = 1e-6;
  for (int n = 2; n <= 6; ++n) {
    const SensingGraph g(n);
    const std::vector<Vec2> c = random_coords(rng, n + 1);
    const Eigen::MatrixXd r = rigidity_matrix(c, g);
    for (int v = 0; v <= n; ++v) {
      for (int a = 0; a < 2; ++a) {
        std::vector<Vec2> plus = c, minus = c;
        plus[v](a) += h;
        minus[v](a) -= h;
        const Eigen::VectorXd fd = (edge_function(plus, g) - edge_function(minus, g)) / (2.0 * h);
        const Eigen::VectorXd analytic = 2.0 * r.col(g.column_of(v) + a);
        EXPECT_LT((fd - analytic).cwiseAbs().maxCoeff(), 1e-6) << "n=" << n << " v=" << v;
      }
    }
  }
}

TEST(Decompose, TailIdentityAndShapes) {
  const DesiredFramework fw = henneberg_build(5.0, kFiveAgentAngles);
  const RigidityDecomposition d = decompose(rigidity_matrix(fw.coordinates, fw.graph));
  EXPECT_EQ(d.sub_matrix.rows(), 9);
  EXPECT_EQ(d.sub_matrix.cols(), 10);
  EXPECT_EQ(d.tail.cols(), 2);
  Eigen::MatrixXd kron = Eigen::MatrixXd::Zero(10, 2);
  for (int i = 0; i < 5; ++i) kron.block<2, 2>(2 * i, 0).setIdentity();
  EXPECT_EQ((d.tail + d.sub_matrix * kron).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Decompose, TriangleHasFullRowRank) {
  std::mt19937_64 rng(19);
  const SensingGraph g(2);
  const RigidityDecomposition d = decompose(rigidity_matrix(random_coords(rng, 3), g));
  ASSERT_EQ(d.sub_matrix.rows(), 3);
  ASSERT_EQ(d.sub_matrix.cols(), 4);
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(d.sub_matrix);
  EXPECT_EQ(svd.rank(), 3);
}

TEST(Decompose, RejectsCorruptedTail) {
  const DesiredFramework fw = henneberg_build(5.0, kFiveAgentAngles);
  Eigen::MatrixXd r = rigidity_matrix(fw.coordinates, fw.graph);
  r(3, r.cols() - 1) += 1e-3;
  EXPECT_THROW(decompose(r), DecompositionMismatch);
  EXPECT_THROW(decompose(Eigen::MatrixXd::Zero(4, 7)), DimensionMismatch);
  EXPECT_THROW(decompose(Eigen::MatrixXd::Zero(3, 5)), DimensionMismatch);
}

TEST(InfinitesimalRigidity, DesiredFrameworkIsRigid) {
  const DesiredFramework fw = henneberg_build(5.0, kFiveAgentAngles);
  const RigidityCheck rc = is_infinitesimally_rigid(fw.coordinates, fw.graph);
  EXPECT_TRUE(rc.rigid);
  EXPECT_EQ(rc.rank, 9);
  EXPECT_GT(rc.sigma_min, 0.0);

  std::vector<Vec2> moved = fw.coordinates;
  for (Vec2& p : moved) p += Vec2(-40.0, 12.0);
  const RigidityCheck rc2 = is_infinitesimally_rigid(moved, fw.graph);
  EXPECT_TRUE(rc2.rigid);
  EXPECT_NEAR(rc2.sigma_min, rc.sigma_min, 1e-9);
}

TEST(InfinitesimalRigidity, CollinearIsNotRigid) {
  for (int n = 2; n <= 5; ++n) {
    const SensingGraph g(n);
    std::vector<Vec2> c;
    for (int v = 0; v <= n; ++v) c.emplace_back(1.5 * v - 2.0, 0.5 * (1.5 * v - 2.0));
    const RigidityCheck rc = is_infinitesimally_rigid(c, g);
    EXPECT_FALSE(rc.rigid) << n;
    EXPECT_LT(rc.sigma_min, 1e-8 * rc.sigma_max);
    const RigidityDecomposition d = decompose(rigidity_matrix(c, g));
    EXPECT_LT(min_eigenvalue_mmt(d.sub_matrix), 1e-8);
  }
}

TEST(InfinitesimalRigidity, AllCoincidentReturnsFalse) {
  const SensingGraph g(3);
  const std::vector<Vec2> c(4, Vec2(1.0, 1.0));
  EXPECT_FALSE(is_infinitesimally_rigid(c, g).rigid);
}

TEST(MinEigenvalue, MatchesSquaredSingularValue) {
  std::mt19937_64 rng(23);
  for (int n = 2; n <= 10; ++n) {
    const DesiredFramework fw = henneberg_build(4.0, random_separation_angles(rng, n));
    const RigidityDecomposition d = decompose(rigidity_matrix(fw.coordinates, fw.graph));
    const double lambda = min_eigenvalue_mmt(d.sub_matrix);
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(d.sub_matrix);
    const double s_min = svd.singularValues()(fw.graph.n_edges() - 1);
    EXPECT_GT(lambda, 0.0);
    EXPECT_NEAR(lambda, s_min * s_min, 1e-9 * s_min * s_min) << n;
  }
}

// Random feasible specs: minimal edge count, rigidity, positive lambda.
TEST(RigidityProperty, RandomSpecsAreMinimallyRigid) {
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<int> count(2, 10);
  std::uniform_real_distribution<double> radius(0.5, 20.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = count(rng);
    const DesiredFramework fw = henneberg_build(radius(rng), random_separation_angles(rng, n, 5.0));
    EXPECT_EQ(fw.graph.n_edges(), 2 * n - 1);
    EXPECT_EQ(fw.graph.n_edges(), 2 * fw.graph.n_vertices() - 3);
    const RigidityCheck rc = is_infinitesimally_rigid(fw.coordinates, fw.graph);
    EXPECT_TRUE(rc.rigid) << "trial " << trial;
    const RigidityDecomposition d = decompose(rigidity_matrix(fw.coordinates, fw.graph));
    EXPECT_GT(min_eigenvalue_mmt(d.sub_matrix), 0.0);
  }
}

}  // namespace
}  // namespace enclose
