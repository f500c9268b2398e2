// Attributed graphs, their dense padded matrix representations, and the
// vertex-relabeling group action. Everything here is a value type; functions
// never mutate their arguments, so instances can be shared across threads.
#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "gq/error.hpp"

namespace gq {

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Order cap for exhaustive permutation search (8! = 40320 candidates).
inline constexpr int kDefaultExactLimit = 8;

/// An attributed graph: every vertex carries a feature vector, every ordered
/// vertex pair may carry a nonzero feature vector (its edge attribute).
/// The zero vector is the null attribute; a pair whose attribute would be
/// zero simply has no edge, and storing one is rejected. All feature vectors
/// share one dimension.
template <class Scalar = double>
class Graph {
 public:
  using Vector = VectorX<Scalar>;
  using EdgeMap = std::map<std::pair<int, int>, Vector>;

  Graph(std::vector<Vector> vertex_attrs, EdgeMap edge_attrs)
      : vertex_attrs_(std::move(vertex_attrs)), edge_attrs_(std::move(edge_attrs)) {
    if (vertex_attrs_.empty()) throw ConfigError("graph must have at least one vertex");
    const Eigen::Index h = vertex_attrs_.front().size();
    if (h < 1) throw DimensionMismatch("attribute dimension must be positive");
    for (const auto& v : vertex_attrs_) {
      if (v.size() != h) throw DimensionMismatch("vertex attributes disagree on dimension");
    }
    const int m = order();
    for (const auto& [pair, attr] : edge_attrs_) {
      const auto [i, j] = pair;
      if (i < 0 || i >= m || j < 0 || j >= m || i == j) {
        throw InvalidEdge("edge (" + std::to_string(i) + "," + std::to_string(j) +
                          ") out of range for order " + std::to_string(m));
      }
      if (attr.size() != h) throw DimensionMismatch("edge attribute disagrees on dimension");
      if (attr.isZero(Scalar(0))) {
        throw InvalidEdge("zero edge attribute must not be stored (the pair has no edge)");
      }
    }
  }

  int order() const { return static_cast<int>(vertex_attrs_.size()); }
  Eigen::Index attr_dim() const { return vertex_attrs_.front().size(); }

  const Vector& vertex_attr(int i) const { return vertex_attrs_.at(static_cast<size_t>(i)); }
  const std::vector<Vector>& vertex_attrs() const { return vertex_attrs_; }
  const EdgeMap& edges() const { return edge_attrs_; }

  bool has_edge(int i, int j) const { return edge_attrs_.count({i, j}) > 0; }

  /// Attribute of the ordered pair (i, j); the zero vector when no edge.
  Vector edge_attr(int i, int j) const {
    auto it = edge_attrs_.find({i, j});
    if (it == edge_attrs_.end()) return Vector::Zero(attr_dim());
    return it->second;
  }

  /// True when every stored edge has a bitwise-equal reverse edge.
  bool is_symmetric() const {
    for (const auto& [pair, attr] : edge_attrs_) {
      auto rev = edge_attrs_.find({pair.second, pair.first});
      if (rev == edge_attrs_.end() || rev->second != attr) return false;
    }
    return true;
  }

 private:
  std::vector<Vector> vertex_attrs_;
  EdgeMap edge_attrs_;
};

/// A bijection on {0..n-1}. Validated on construction.
class Permutation {
 public:
  explicit Permutation(std::vector<int> map) : map_(std::move(map)) {
    std::vector<char> seen(map_.size(), 0);
    for (int v : map_) {
      if (v < 0 || v >= static_cast<int>(map_.size()) || seen[static_cast<size_t>(v)]) {
        throw ConfigError("not a permutation of {0..n-1}");
      }
      seen[static_cast<size_t>(v)] = 1;
    }
  }

  static Permutation identity(int n) {
    std::vector<int> m(static_cast<size_t>(n));
    std::iota(m.begin(), m.end(), 0);
    return Permutation(std::move(m));
  }

  int size() const { return static_cast<int>(map_.size()); }
  int operator()(int i) const { return map_[static_cast<size_t>(i)]; }
  const std::vector<int>& indices() const { return map_; }

  Permutation inverse() const {
    std::vector<int> inv(map_.size());
    for (size_t i = 0; i < map_.size(); ++i) inv[static_cast<size_t>(map_[i])] = static_cast<int>(i);
    return Permutation(std::move(inv));
  }

  bool operator==(const Permutation& o) const { return map_ == o.map_; }
  bool operator!=(const Permutation& o) const { return map_ != o.map_; }
  /// Lexicographic order; used for deterministic tie-breaking.
  bool operator<(const Permutation& o) const { return map_ < o.map_; }

 private:
  std::vector<int> map_;
};

/// compose(p, q)(i) = p(q(i)).
inline Permutation compose(const Permutation& p, const Permutation& q) {
  if (p.size() != q.size()) throw DimensionMismatch("composing permutations of different size");
  std::vector<int> m(static_cast<size_t>(p.size()));
  for (int i = 0; i < p.size(); ++i) m[static_cast<size_t>(i)] = p(q(i));
  return Permutation(std::move(m));
}

/// Dense representation of an attributed graph padded to a fixed order n:
/// an n-by-n grid of feature vectors stored as attr_dim scalar slices, where
/// slice c holds coordinate c of every cell. Diagonal cells are vertex
/// attributes, off-diagonal cells edge attributes, padding is zero.
template <class Scalar = double>
class GraphMatrix {
 public:
  using Matrix = MatrixX<Scalar>;
  using Vector = VectorX<Scalar>;

  GraphMatrix() = default;
  GraphMatrix(Eigen::Index order, Eigen::Index attr_dim)
      : order_(order), slices_(static_cast<size_t>(attr_dim), Matrix::Zero(order, order)) {
    if (order < 0 || attr_dim < 1) throw DimensionMismatch("invalid representation shape");
  }

  Eigen::Index order() const { return order_; }
  Eigen::Index attr_dim() const { return static_cast<Eigen::Index>(slices_.size()); }

  Matrix& slice(Eigen::Index c) { return slices_[static_cast<size_t>(c)]; }
  const Matrix& slice(Eigen::Index c) const { return slices_[static_cast<size_t>(c)]; }

  Vector cell(Eigen::Index i, Eigen::Index j) const {
    Vector v(attr_dim());
    for (Eigen::Index c = 0; c < attr_dim(); ++c) v(c) = slices_[static_cast<size_t>(c)](i, j);
    return v;
  }

  void set_cell(Eigen::Index i, Eigen::Index j, const Vector& v) {
    if (v.size() != attr_dim()) throw DimensionMismatch("cell attribute has wrong dimension");
    for (Eigen::Index c = 0; c < attr_dim(); ++c) slices_[static_cast<size_t>(c)](i, j) = v(c);
  }

  bool operator==(const GraphMatrix& o) const {
    if (order_ != o.order_ || slices_.size() != o.slices_.size()) return false;
    for (size_t c = 0; c < slices_.size(); ++c) {
      if (!(slices_[c].array() == o.slices_[c].array()).all()) return false;
    }
    return true;
  }
  bool operator!=(const GraphMatrix& o) const { return !(*this == o); }

  GraphMatrix& operator+=(const GraphMatrix& o) {
    for (size_t c = 0; c < slices_.size(); ++c) slices_[c] += o.slices_[c];
    return *this;
  }
  GraphMatrix& operator-=(const GraphMatrix& o) {
    for (size_t c = 0; c < slices_.size(); ++c) slices_[c] -= o.slices_[c];
    return *this;
  }
  GraphMatrix& operator*=(Scalar s) {
    for (auto& m : slices_) m *= s;
    return *this;
  }
  GraphMatrix& operator/=(Scalar s) {
    for (auto& m : slices_) m /= s;
    return *this;
  }

  friend GraphMatrix operator+(GraphMatrix a, const GraphMatrix& b) { return a += b; }
  friend GraphMatrix operator-(GraphMatrix a, const GraphMatrix& b) { return a -= b; }
  friend GraphMatrix operator*(GraphMatrix a, Scalar s) { return a *= s; }
  friend GraphMatrix operator*(Scalar s, GraphMatrix a) { return a *= s; }

 private:
  Eigen::Index order_ = 0;
  std::vector<Matrix> slices_;
};

template <class Scalar>
void require_same_shape(const GraphMatrix<Scalar>& a, const GraphMatrix<Scalar>& b) {
  if (a.order() != b.order() || a.attr_dim() != b.attr_dim()) {
    throw DimensionMismatch("representation matrices disagree on order or attribute dimension");
  }
}

/// Frobenius inner product: the sum over all cells of attribute dot products.
template <class Scalar>
Scalar frobenius(const GraphMatrix<Scalar>& a, const GraphMatrix<Scalar>& b) {
  require_same_shape(a, b);
  Scalar acc = 0;
  for (Eigen::Index c = 0; c < a.attr_dim(); ++c) {
    acc += a.slice(c).cwiseProduct(b.slice(c)).sum();
  }
  return acc;
}

template <class Scalar>
Scalar squared_norm(const GraphMatrix<Scalar>& x) {
  Scalar acc = 0;
  for (Eigen::Index c = 0; c < x.attr_dim(); ++c) acc += x.slice(c).squaredNorm();
  return acc;
}

template <class Scalar>
Scalar norm(const GraphMatrix<Scalar>& x) {
  using std::sqrt;
  return sqrt(squared_norm(x));
}

/// Vertex relabeling: result(i, j) = x(p(i), p(j)). Pure reindexing, no
/// arithmetic. Under compose(p, q)(i) = p(q(i)) the action satisfies
/// act(compose(p, q), x) == act(q, act(p, x)).
template <class Scalar>
GraphMatrix<Scalar> act(const Permutation& p, const GraphMatrix<Scalar>& x) {
  if (p.size() != x.order()) throw DimensionMismatch("permutation size differs from matrix order");
  GraphMatrix<Scalar> out(x.order(), x.attr_dim());
  const auto& idx = p.indices();
  for (Eigen::Index c = 0; c < x.attr_dim(); ++c) out.slice(c) = x.slice(c)(idx, idx);
  return out;
}

/// Pads a graph to the given order: diagonal cells take vertex attributes,
/// off-diagonal cells take edge attributes, inserted vertices stay zero.
template <class Scalar>
GraphMatrix<Scalar> embed(const Graph<Scalar>& g, Eigen::Index order_bound) {
  if (g.order() > order_bound) {
    throw OrderExceedsBound("graph order " + std::to_string(g.order()) +
                            " exceeds bound " + std::to_string(order_bound));
  }
  GraphMatrix<Scalar> out(order_bound, g.attr_dim());
  for (int i = 0; i < g.order(); ++i) out.set_cell(i, i, g.vertex_attr(i));
  for (const auto& [pair, attr] : g.edges()) out.set_cell(pair.first, pair.second, attr);
  return out;
}

/// Reads a graph back off a representation matrix. All n slots become
/// vertices; padding cannot be told apart from genuine null vertices, so the
/// result has order n and re-embedding it reproduces the matrix exactly.
template <class Scalar>
Graph<Scalar> extract(const GraphMatrix<Scalar>& x) {
  std::vector<VectorX<Scalar>> vattrs;
  vattrs.reserve(static_cast<size_t>(x.order()));
  for (Eigen::Index i = 0; i < x.order(); ++i) vattrs.push_back(x.cell(i, i));
  typename Graph<Scalar>::EdgeMap edges;
  for (Eigen::Index i = 0; i < x.order(); ++i) {
    for (Eigen::Index j = 0; j < x.order(); ++j) {
      if (i == j) continue;
      VectorX<Scalar> a = x.cell(i, j);
      if (!a.isZero(Scalar(0))) edges.emplace(std::make_pair(static_cast<int>(i), static_cast<int>(j)), a);
    }
  }
  return Graph<Scalar>(std::move(vattrs), std::move(edges));
}

/// True iff some vertex relabeling maps x onto y bitwise, i.e. the two
/// matrices represent the same graph. Exhaustive over all n! candidates.
template <class Scalar>
bool orbit_equal(const GraphMatrix<Scalar>& x, const GraphMatrix<Scalar>& y,
                 int exact_limit = kDefaultExactLimit) {
  require_same_shape(x, y);
  const int n = static_cast<int>(x.order());
  if (n > exact_limit) {
    throw ExactLimitExceeded("order " + std::to_string(n) + " exceeds exact search limit " +
                             std::to_string(exact_limit));
  }
  std::vector<int> p(static_cast<size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  do {
    bool match = true;
    for (Eigen::Index c = 0; match && c < x.attr_dim(); ++c) {
      const auto& xs = x.slice(c);
      const auto& ys = y.slice(c);
      for (int i = 0; match && i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (xs(p[static_cast<size_t>(i)], p[static_cast<size_t>(j)]) != ys(i, j)) {
            match = false;
            break;
          }
        }
      }
    }
    if (match) return true;
  } while (std::next_permutation(p.begin(), p.end()));
  return false;
}

using Graphd = Graph<double>;
using GraphMatrixd = GraphMatrix<double>;

}  // namespace gq
