#include "semiflow/graph3d.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <set>

#include "json_detail.hpp"

namespace semiflow {

using nlohmann::json;

void Graph3D::normalize_edges() {
  for (Edge& e : edges) {
    if (e.i == e.j) throw SizeError("edge connects a vertex to itself");
    if (e.i > e.j) std::swap(e.i, e.j);
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::pair(a.i, a.j) < std::pair(b.i, b.j);
  });
}

void Graph3D::validate() const {
  if (features.cols() != positions.cols())
    throw SizeError("feature count does not match vertex count");
  std::set<std::pair<int, int>> seen;
  const int d_e = edge_feature_dim();
  for (const Edge& e : edges) {
    if (!(0 <= e.i && e.i < e.j && e.j < n()))
      throw SizeError("edge indices must satisfy 0 <= i < j < N");
    if (!seen.insert({e.i, e.j}).second)
      throw SizeError("duplicate edge");
    if (static_cast<int>(e.feat.size()) != d_e)
      throw SizeError("edge feature dimensions differ");
  }
  if (!positions.allFinite() || !features.allFinite())
    throw NumericError("graph contains non-finite values");
}

bool Graph3D::operator==(const Graph3D& other) const {
  if (n() != other.n() || feature_dim() != other.feature_dim()) return false;
  if (positions != other.positions || features != other.features) return false;
  if (edges.size() != other.edges.size()) return false;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Edge& a = edges[k];
    const Edge& b = other.edges[k];
    if (a.i != b.i || a.j != b.j || a.feat != b.feat) return false;
  }
  return globals == other.globals;
}

RigidTransform RigidTransform::compose(const RigidTransform& other) const {
  return {rotation * other.rotation, rotation * other.translation + translation};
}

RigidTransform RigidTransform::inverse() const {
  return {rotation.transpose(), -(rotation.transpose() * translation)};
}

void RigidTransform::validate() const {
  const double ortho =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
          .cwiseAbs()
          .maxCoeff();
  if (ortho > 1e-12) throw DomainError("rotation is not orthogonal");
  if (std::abs(std::abs(rotation.determinant()) - 1.0) > 1e-12)
    throw DomainError("rotation determinant is not +-1");
}

Permutation Permutation::identity(int n) {
  Permutation p;
  p.map.resize(n);
  std::iota(p.map.begin(), p.map.end(), 0);
  return p;
}

Permutation Permutation::random(int n, CounterRng& rng) {
  Permutation p = identity(n);
  for (int i = n - 1; i > 0; --i)
    std::swap(p.map[i], p.map[rng.uniform_int(0, i)]);
  return p;
}

Permutation Permutation::compose(const Permutation& inner) const {
  if (n() != inner.n()) throw SizeError("permutation sizes differ");
  Permutation out;
  out.map.resize(n());
  // (this ∘ inner) applied to a list: out[i] = inner.map[this->map[i]]
  // so that apply(this, apply(inner, V)) == apply(this ∘ inner, V).
  for (int i = 0; i < n(); ++i) out.map[i] = inner.map[map[i]];
  return out;
}

Permutation Permutation::inverse() const {
  Permutation out;
  out.map.resize(n());
  for (int i = 0; i < n(); ++i) out.map[map[i]] = i;
  return out;
}

void Permutation::validate() const {
  std::vector<int> sorted = map;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < n(); ++i)
    if (sorted[i] != i) throw DomainError("mapping is not a bijection");
}

void VertexVector::validate() const {
  if (static_cast<int>(data.size()) != dim())
    throw SizeError("vertex vector length does not match (d_h + 3) * N");
}

Graph3D apply_rigid(const RigidTransform& t, const Graph3D& g) {
  Graph3D out = g;
  out.positions = (t.rotation * g.positions).colwise() + t.translation;
  return out;
}

Graph3D apply_perm(const Permutation& p, const Graph3D& g) {
  if (p.n() != g.n())
    throw SizeError("permutation length does not match vertex count");
  Graph3D out = g;
  for (int i = 0; i < g.n(); ++i) {
    out.positions.col(i) = g.positions.col(p.map[i]);
    if (g.feature_dim() > 0) out.features.col(i) = g.features.col(p.map[i]);
  }
  const Permutation inv = p.inverse();
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    out.edges[k].i = inv.map[g.edges[k].i];
    out.edges[k].j = inv.map[g.edges[k].j];
  }
  out.normalize_edges();
  return out;
}

VertexSet apply_rigid(const RigidTransform& t, const VertexSet& v) {
  return {(t.rotation * v.x).colwise() + t.translation, v.h};
}

VertexSet apply_rotation(const Eigen::Matrix3d& r, const VertexSet& v) {
  return {r * v.x, v.h};
}

VertexSet apply_perm(const Permutation& p, const VertexSet& v) {
  if (p.n() != v.n()) throw SizeError("permutation length mismatch");
  VertexSet out;
  out.x.resize(3, v.n());
  out.h.resize(v.feature_dim(), v.n());
  for (int i = 0; i < v.n(); ++i) {
    out.x.col(i) = v.x.col(p.map[i]);
    if (v.feature_dim() > 0) out.h.col(i) = v.h.col(p.map[i]);
  }
  return out;
}

VertexVector vectorize(const VertexSet& v) {
  const int n = v.n();
  const int d_h = v.feature_dim();
  VertexVector out;
  out.n_vertices = n;
  out.feature_dim = d_h;
  out.data.resize((d_h + 3) * n);
  out.data.head(3 * n) =
      Eigen::Map<const Eigen::VectorXd>(v.x.data(), 3 * n);
  if (d_h > 0)
    out.data.tail(d_h * n) =
        Eigen::Map<const Eigen::VectorXd>(v.h.data(), d_h * n);
  return out;
}

VertexSet devectorize(const VertexVector& v) {
  v.validate();
  VertexSet out;
  out.x = Eigen::Map<const Eigen::Matrix3Xd>(v.data.data(), 3, v.n_vertices);
  out.h = v.feature_dim > 0
              ? Eigen::MatrixXd(Eigen::Map<const Eigen::MatrixXd>(
                    v.data.data() + 3 * v.n_vertices, v.feature_dim,
                    v.n_vertices))
              : Eigen::MatrixXd(0, v.n_vertices);
  return out;
}

VertexSet vertices_of(const Graph3D& g) { return {g.positions, g.features}; }

Graph3D with_vertices(const Graph3D& g, const VertexSet& v) {
  if (v.n() != g.n()) throw SizeError("vertex count differs from graph");
  Graph3D out = g;
  out.positions = v.x;
  out.features = v.h;
  return out;
}

VertexVector apply_rotation(const Eigen::Matrix3d& r, const VertexVector& v) {
  VertexSet s = devectorize(v);
  s.x = r * s.x;
  return vectorize(s);
}

Eigen::Matrix3d random_orthogonal(CounterRng& rng, bool proper_only) {
  const Eigen::Matrix3d gauss = rng.normal_mat(3, 3);
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(gauss);
  Eigen::Matrix3d q = qr.householderQ();
  const Eigen::Matrix3d r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < 3; ++c)
    if (r(c, c) < 0) q.col(c) = -q.col(c);
  if (proper_only && q.determinant() < 0) q.col(0) = -q.col(0);
  return q;
}

RigidTransform random_rigid(CounterRng& rng, double translation_scale,
                            bool proper_only) {
  RigidTransform t;
  t.rotation = random_orthogonal(rng, proper_only);
  t.translation = translation_scale * rng.normal_vec(3);
  return t;
}

namespace {

json matrix_to_json_cols(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (int c = 0; c < m.cols(); ++c) {
    json col = json::array();
    for (int r = 0; r < m.rows(); ++r) col.push_back(m(r, c));
    out.push_back(std::move(col));
  }
  return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

}  // namespace

json graph_to_json_obj(const Graph3D& g) {
  json j;
  j["n"] = g.n();
  j["x"] = matrix_to_json_cols(g.positions);
  j["h"] = matrix_to_json_cols(g.features);
  json edges = json::array();
  for (const Graph3D::Edge& e : g.edges)
    edges.push_back(json::array({e.i, e.j, vector_to_json(e.feat)}));
  j["edges"] = std::move(edges);
  json globals = json::array();
  for (const Eigen::VectorXd& a : g.globals) globals.push_back(vector_to_json(a));
  j["globals"] = std::move(globals);
  return j;
}

std::string to_json_line(const Graph3D& g) { return graph_to_json_obj(g).dump(); }

Graph3D graph_from_json_obj(const json& j) {
  Graph3D g;
  const int n = j.at("n").get<int>();
  const json& x = j.at("x");
  if (static_cast<int>(x.size()) != n)
    throw ParseError("graph: position count does not match n");
  g.positions.resize(3, n);
  for (int c = 0; c < n; ++c) {
    if (x[c].size() != 3) throw ParseError("graph: position is not a 3-vector");
    for (int r = 0; r < 3; ++r) g.positions(r, c) = x[c][r].get<double>();
  }
  const json& h = j.at("h");
  if (static_cast<int>(h.size()) != n)
    throw ParseError("graph: feature count does not match n");
  const int d_h = n > 0 ? static_cast<int>(h[0].size()) : 0;
  g.features.resize(d_h, n);
  for (int c = 0; c < n; ++c) {
    if (static_cast<int>(h[c].size()) != d_h)
      throw ParseError("graph: inconsistent feature dimensions");
    for (int r = 0; r < d_h; ++r) g.features(r, c) = h[c][r].get<double>();
  }
  for (const json& e : j.at("edges")) {
    if (e.size() != 3) throw ParseError("graph: edge entry is not [i, j, feat]");
    g.edges.push_back(
        {e[0].get<int>(), e[1].get<int>(), vector_from_json(e[2])});
  }
  for (const json& a : j.at("globals")) g.globals.push_back(vector_from_json(a));
  g.validate();
  return g;
}

Graph3D graph_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(std::string("graph json: ") + e.what());
  }
  try {
    return graph_from_json_obj(j);
  } catch (const json::exception& e) {
    throw ParseError(std::string("graph json: ") + e.what());
  }
}

}  // namespace semiflow
