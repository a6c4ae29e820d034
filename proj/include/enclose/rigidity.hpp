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

// Chain-plus-target sensing graph, the fan framework built by vertex
// addition around the target, and rigidity-matrix machinery.
//
// Vertex 0 is the target, vertices 1..N are agents. Edges follow the order
//   (1,2),(2,3),...,(N-1,N),(1,0),(2,0),...,(N,0)
// and every per-edge vector in the library is indexed that way. Columns of
// the rigidity matrix follow [p_1, ..., p_N, p_0], so the target block is the
// last column pair.

#ifndef ENCLOSE_RIGIDITY_HPP
#define ENCLOSE_RIGIDITY_HPP

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "enclose/errors.hpp"

namespace enclose {

using Vec2 = Eigen::Vector2d;

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

struct Edge {
  int i;  ///< agent endpoint (1..N)
  int j;  ///< neighbour: the next agent for chain edges, 0 for radial edges

  bool radial() const noexcept { return j == 0; }
  friend bool operator==(const Edge&, const Edge&) = default;
};

class SensingGraph {
 public:
  explicit SensingGraph(int n_agents) : n_(n_agents) {
    if (n_agents < 1) {
      throw InvalidParameter(fmt::format("sensing graph needs at least one agent, got {}", n_agents));
    }
    edges_.reserve(2 * n_ - 1);
    for (int i = 1; i < n_; ++i) edges_.push_back({i, i + 1});
    for (int i = 1; i <= n_; ++i) edges_.push_back({i, 0});
  }

  int n_agents() const noexcept { return n_; }
  int n_vertices() const noexcept { return n_ + 1; }
  int n_edges() const noexcept { return 2 * n_ - 1; }
  int n_chain_edges() const noexcept { return n_ - 1; }

  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(int k) const { return edges_.at(k); }

  /// Edge id of (i, i+1), i in 1..N-1.
  int chain_edge(int i) const noexcept { return i - 1; }
  /// Edge id of (i, 0), i in 1..N.
  int radial_edge(int i) const noexcept { return n_ - 1 + i - 1; }

  /// Column offset of vertex v in the rigidity matrix.
  int column_of(int v) const noexcept { return v == 0 ? 2 * n_ : 2 * (v - 1); }

  std::string edge_label(int k) const {
    const Edge& e = edges_.at(k);
    return fmt::format("{}_{}", e.i, e.j);
  }

  friend bool operator==(const SensingGraph& a, const SensingGraph& b) { return a.n_ == b.n_; }

 private:
  int n_;
  std::vector<Edge> edges_;
};

/// Reference framework p-bar* realising the enclosing pattern.
struct DesiredFramework {
  SensingGraph graph;
  double radius;
  /// Separation angles in degrees, including the implied closing angle c_{N1}.
  std::vector<double> separation_deg;
  /// Indexed by vertex id; target at index 0 (the origin).
  std::vector<Vec2> coordinates;
  /// Per canonical edge.
  std::vector<double> desired_distances;
};

namespace detail {

inline bool open_angle(double deg) { return deg > 0.0 && deg < 180.0; }

inline void check_coordinates(std::span<const Vec2> coords, const SensingGraph& graph) {
  if (static_cast<int>(coords.size()) != graph.n_vertices()) {
    throw DimensionMismatch(fmt::format("expected {} vertex coordinates, got {}",
                                        graph.n_vertices(), coords.size()));
  }
}

}  // namespace detail

/// Chord length of a separation angle on the radius-r circle.
inline double chord_length(double radius, double angle_deg) {
  return 2.0 * radius * std::sin(deg_to_rad(angle_deg) / 2.0);
}

/// Implied closing angle 360 - sum(angles).
inline double closing_angle(std::span<const double> angles_deg) {
  double sum = 0.0;
  for (double a : angles_deg) sum += a;
  return 360.0 - sum;
}

/// Builds the fan framework by Henneberg vertex addition: a triangle on the
/// target, agent 1 and agent 2, then each agent i >= 3 attached to the
/// target and to agent i-1.
///
/// `angles_deg` holds c_{12}, ..., c_{N-1,N}. The closing angle c_{N1} is
/// implied; it must also be in (0, 180) once N >= 3. For N = 2 the two
/// agents and the target always form a triangle, and the reflex side is not
/// a separate edge, so only c_{12} is range-checked.
inline DesiredFramework henneberg_build(double radius, std::span<const double> angles_deg) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw NonpositiveRadius(fmt::format("radius must be positive, got {}", radius));
  }
  if (angles_deg.empty()) {
    throw InvalidParameter("at least one separation angle is required (N >= 2)");
  }
  for (std::size_t k = 0; k < angles_deg.size(); ++k) {
    if (!detail::open_angle(angles_deg[k])) {
      throw AngleOutOfRange(fmt::format("separation angle c_{}{} = {} deg is outside (0, 180)",
                                        k + 1, k + 2, angles_deg[k]));
    }
  }
  const int n = static_cast<int>(angles_deg.size()) + 1;
  const double closing = closing_angle(angles_deg);
  if (n >= 3 && !detail::open_angle(closing)) {
    throw AngleOutOfRange(
        fmt::format("implied closing angle c_{}1 = {} deg is outside (0, 180)", n, closing));
  }

  DesiredFramework fw{SensingGraph(n), radius, {}, {}, {}};
  fw.separation_deg.assign(angles_deg.begin(), angles_deg.end());
  fw.separation_deg.push_back(closing);

  fw.coordinates.resize(n + 1);
  fw.coordinates[0] = Vec2::Zero();
  double cumulative = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double phi = deg_to_rad(cumulative);
    fw.coordinates[i] = Vec2(radius * std::cos(phi), radius * std::sin(phi));
    if (i < n) cumulative += angles_deg[i - 1];
  }

  fw.desired_distances.reserve(fw.graph.n_edges());
  for (int i = 1; i < n; ++i) fw.desired_distances.push_back(chord_length(radius, angles_deg[i - 1]));
  for (int i = 1; i <= n; ++i) fw.desired_distances.push_back(radius);
  return fw;
}

/// Squared edge lengths in canonical order.
inline Eigen::VectorXd edge_function(std::span<const Vec2> coords, const SensingGraph& graph) {
  detail::check_coordinates(coords, graph);
  Eigen::VectorXd phi(graph.n_edges());
  for (int k = 0; k < graph.n_edges(); ++k) {
    const Edge& e = graph.edge(k);
    phi(k) = (coords[e.i] - coords[e.j]).squaredNorm();
  }
  return phi;
}

/// R = (1/2) d(phi)/d(p-bar), (2N-1) x (2N+2).
inline Eigen::MatrixXd rigidity_matrix(std::span<const Vec2> coords, const SensingGraph& graph) {
  detail::check_coordinates(coords, graph);
  const int n = graph.n_agents();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(graph.n_edges(), 2 * n + 2);
  for (int k = 0; k < graph.n_edges(); ++k) {
    const Edge& e = graph.edge(k);
    const Vec2 pij = coords[e.i] - coords[e.j];
    r.block<1, 2>(k, graph.column_of(e.i)) = pij.transpose();
    r.block<1, 2>(k, graph.column_of(e.j)) = -pij.transpose();
  }
  return r;
}

/// R = [M, -M (1_N kron I_2)].
struct RigidityDecomposition {
  Eigen::MatrixXd full_matrix;
  Eigen::MatrixXd sub_matrix;
  Eigen::MatrixXd tail;
};

/// M (1_N kron I_2): sums the x and y columns of every agent block.
inline Eigen::MatrixXd sum_agent_blocks(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), 2);
  for (Eigen::Index c = 0; c + 1 < m.cols(); c += 2) out += m.middleCols(c, 2);
  return out;
}

inline RigidityDecomposition decompose(const Eigen::MatrixXd& r) {
  if (r.rows() < 1 || r.rows() % 2 == 0 || r.cols() != r.rows() + 3) {
    throw DimensionMismatch(fmt::format(
        "rigidity matrix must be (2N-1) x (2N+2), got {} x {}", r.rows(), r.cols()));
  }
  const Eigen::Index agent_cols = r.cols() - 2;
  RigidityDecomposition d{r, r.leftCols(agent_cols), r.rightCols(2)};
  const double residual = (d.tail + sum_agent_blocks(d.sub_matrix)).cwiseAbs().maxCoeff();
  if (residual > 1e-12) {
    throw DecompositionMismatch(
        fmt::format("tail != -M(1_N kron I_2): max residual {:.3e}", residual));
  }
  return d;
}

struct RigidityCheck {
  bool rigid = false;
  int rank = 0;
  /// Smallest of the first 2N-1 singular values (the rigidity margin).
  double sigma_min = 0.0;
  double sigma_max = 0.0;
};

inline constexpr double kDefaultRankTolerance = 1e-8;

/// Numerical rank test: singular values above tol * sigma_max count.
inline RigidityCheck is_infinitesimally_rigid(std::span<const Vec2> coords,
                                              const SensingGraph& graph,
                                              double tol = kDefaultRankTolerance) {
  const Eigen::MatrixXd r = rigidity_matrix(coords, graph);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  const Eigen::VectorXd& s = svd.singularValues();
  RigidityCheck out;
  out.sigma_max = s.size() > 0 ? s(0) : 0.0;
  const int expected = graph.n_edges();
  out.sigma_min = s.size() >= expected ? s(expected - 1) : 0.0;
  if (!(out.sigma_max > 0.0) || !std::isfinite(out.sigma_max)) return out;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s(k) > tol * out.sigma_max) ++out.rank;
  }
  out.rigid = out.rank == expected;
  return out;
}

/// Smallest eigenvalue of M M^T, clamped at zero.
inline double min_eigenvalue_mmt(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd gram = m * m.transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  return std::max(0.0, eig.eigenvalues()(0));
}

}  // namespace enclose

#endif  // ENCLOSE_RIGIDITY_HPP
