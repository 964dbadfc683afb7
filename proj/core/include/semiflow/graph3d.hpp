#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "semiflow/errors.hpp"
#include "semiflow/rng.hpp"

namespace semiflow {

/// A 3D graph: vertex positions, per-vertex feature vectors, an undirected
/// edge list with feature vectors, and a list of global property vectors.
/// Edges are kept canonical: i < j, sorted lexicographically, no duplicates.
struct Graph3D {
  struct Edge {
    int i = 0;
    int j = 0;
    Eigen::VectorXd feat;
  };

  Eigen::Matrix3Xd positions;        // column per vertex
  Eigen::MatrixXd features;          // d_h x N, d_h may be zero
  std::vector<Edge> edges;
  std::vector<Eigen::VectorXd> globals;

  int n() const { return static_cast<int>(positions.cols()); }
  int feature_dim() const { return static_cast<int>(features.rows()); }
  int edge_feature_dim() const {
    return edges.empty() ? 0 : static_cast<int>(edges.front().feat.size());
  }

  /// Sorts edges into canonical order; throws if an edge is degenerate.
  void normalize_edges();

  /// Checks all structural invariants; throws SizeError on violation.
  void validate() const;

  bool operator==(const Graph3D& other) const;
};

/// Element of E(3): x -> R x + t with R orthogonal (det +1 or -1).
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  /// Composition (this after other): x -> R_this (R_other x + t_other) + t_this.
  RigidTransform compose(const RigidTransform& other) const;

  RigidTransform inverse() const;

  /// Throws unless R^T R = I and |det R| = 1, both to 1e-12.
  void validate() const;
};

/// Bijection of {0..N-1}. apply() reorders so that output vertex i is input
/// vertex map[i].
struct Permutation {
  std::vector<int> map;

  static Permutation identity(int n);
  static Permutation random(int n, CounterRng& rng);

  int n() const { return static_cast<int>(map.size()); }
  Permutation compose(const Permutation& inner) const;  // this ∘ inner
  Permutation inverse() const;
  void validate() const;
};

/// Flattened complement vertex state: all positions first (x_1..x_N), then
/// all features (h_1..h_N); length (d_h + 3) * N.
struct VertexVector {
  Eigen::VectorXd data;
  int n_vertices = 0;
  int feature_dim = 0;

  int dim() const { return (feature_dim + 3) * n_vertices; }
  void validate() const;
};

/// Positions and features of a vertex list, kept as matrices.
struct VertexSet {
  Eigen::Matrix3Xd x;
  Eigen::MatrixXd h;

  int n() const { return static_cast<int>(x.cols()); }
  int feature_dim() const { return static_cast<int>(h.rows()); }
};

Graph3D apply_rigid(const RigidTransform& t, const Graph3D& g);
Graph3D apply_perm(const Permutation& p, const Graph3D& g);

VertexSet apply_rigid(const RigidTransform& t, const VertexSet& v);
VertexSet apply_rotation(const Eigen::Matrix3d& r, const VertexSet& v);
VertexSet apply_perm(const Permutation& p, const VertexSet& v);

VertexVector vectorize(const VertexSet& v);
VertexSet devectorize(const VertexVector& v);

VertexSet vertices_of(const Graph3D& g);
Graph3D with_vertices(const Graph3D& g, const VertexSet& v);

/// Rotation-only action on a vertex vector (features untouched).
VertexVector apply_rotation(const Eigen::Matrix3d& r, const VertexVector& v);

/// Haar-ish random element of O(3) via QR of a Gaussian matrix with
/// sign-fixed diagonal; proper_only forces det +1.
Eigen::Matrix3d random_orthogonal(CounterRng& rng, bool proper_only = false);
RigidTransform random_rigid(CounterRng& rng, double translation_scale = 1.0,
                            bool proper_only = false);

/// One JSON object per graph, keys n/x/h/edges/globals, full float precision.
std::string to_json_line(const Graph3D& g);
Graph3D graph_from_json(const std::string& line);

}  // namespace semiflow
