// Shared helpers for the test suites: small graph builders, random
// generators, and brute-force oracles kept independent of the solver code
// they check (they walk the raw cell storage directly).
#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "gq/alignment.hpp"
#include "gq/graph.hpp"

namespace testutil {

using gq::GraphMatrixd;
using gq::Graphd;

inline Eigen::VectorXd vec1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}

inline Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

/// Order-n matrix with the given scalar diagonal and zero elsewhere (h = 1).
inline GraphMatrixd diag_matrix(const std::vector<double>& d) {
  GraphMatrixd m(static_cast<Eigen::Index>(d.size()), 1);
  for (std::size_t i = 0; i < d.size(); ++i) m.slice(0)(i, i) = d[i];
  return m;
}

/// Scalar-attribute triangle: zero vertex attributes, every edge attribute 1.
inline Graphd triangle_graph() {
  Graphd::EdgeMap edges;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i != j) edges.emplace(std::make_pair(i, j), vec1(1.0));
    }
  }
  return Graphd({vec1(0), vec1(0), vec1(0)}, std::move(edges));
}

/// Scalar-attribute path 1-2-3: zero vertex attributes, edge attributes 1.
inline Graphd path3_graph() {
  Graphd::EdgeMap edges;
  edges.emplace(std::make_pair(0, 1), vec1(1.0));
  edges.emplace(std::make_pair(1, 0), vec1(1.0));
  edges.emplace(std::make_pair(1, 2), vec1(1.0));
  edges.emplace(std::make_pair(2, 1), vec1(1.0));
  return Graphd({vec1(0), vec1(0), vec1(0)}, std::move(edges));
}

/// Random dense representation matrix; grid = true draws attributes from a
/// small integer grid so distinct graphs sit at distance >= 1 apart.
inline GraphMatrixd random_matrix(std::mt19937_64& rng, Eigen::Index n, Eigen::Index dim,
                                  bool grid = false) {
  GraphMatrixd m(n, dim);
  std::uniform_real_distribution<double> real(-2.0, 2.0);
  std::uniform_int_distribution<int> ints(-2, 2);
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        m.slice(c)(i, j) = grid ? static_cast<double>(ints(rng)) : real(rng);
      }
    }
  }
  return m;
}

/// Random sparse-ish graph representation: zero padding beyond a random
/// order, random vertex attributes, random subset of edges.
inline GraphMatrixd random_graph_matrix(std::mt19937_64& rng, Eigen::Index bound, Eigen::Index dim,
                                        bool grid = false) {
  std::uniform_int_distribution<Eigen::Index> order_pick(1, bound);
  const Eigen::Index m = order_pick(rng);
  std::uniform_real_distribution<double> real(-2.0, 2.0);
  std::uniform_int_distribution<int> ints(-2, 2);
  std::bernoulli_distribution edge(0.4);
  GraphMatrixd out(bound, dim);
  auto draw = [&]() { return grid ? static_cast<double>(ints(rng)) : real(rng); };
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index c = 0; c < dim; ++c) out.slice(c)(i, i) = draw();
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i != j && edge(rng)) {
        for (Eigen::Index c = 0; c < dim; ++c) out.slice(c)(i, j) = draw();
      }
    }
  }
  return out;
}

inline gq::Permutation random_permutation(std::mt19937_64& rng, int n) {
  std::vector<int> p(static_cast<size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return gq::Permutation(std::move(p));
}

// ---------------------------------------------------------------------------
// Brute-force oracles. These enumerate permutations and read cells directly;
// they share no code path with the solvers under test.
// ---------------------------------------------------------------------------

inline double oracle_max_kernel(const GraphMatrixd& x, const GraphMatrixd& y) {
  const int n = static_cast<int>(x.order());
  std::vector<int> p(static_cast<size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  double best = -std::numeric_limits<double>::infinity();
  do {
    double acc = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (Eigen::Index c = 0; c < x.attr_dim(); ++c) {
          acc += x.slice(c)(i, j) * y.slice(c)(p[static_cast<size_t>(i)], p[static_cast<size_t>(j)]);
        }
      }
    }
    best = std::max(best, acc);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

/// min over relabelings of the Frobenius distance ||x - act(p, y)||.
inline double oracle_min_frobenius_distance(const GraphMatrixd& x, const GraphMatrixd& y) {
  const int n = static_cast<int>(x.order());
  std::vector<int> p(static_cast<size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double acc = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (Eigen::Index c = 0; c < x.attr_dim(); ++c) {
          const double d =
              x.slice(c)(i, j) - y.slice(c)(p[static_cast<size_t>(i)], p[static_cast<size_t>(j)]);
          acc += d * d;
        }
      }
    }
    best = std::min(best, acc);
  } while (std::next_permutation(p.begin(), p.end()));
  return std::sqrt(best);
}

inline double oracle_min_edit_cost(
    const GraphMatrixd& x, const GraphMatrixd& y,
    const std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>& cell_cost) {
  const int n = static_cast<int>(x.order());
  std::vector<int> p(static_cast<size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double acc = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        acc += cell_cost(x.cell(i, j), y.cell(p[static_cast<size_t>(i)], p[static_cast<size_t>(j)]));
      }
    }
    best = std::min(best, acc);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

}  // namespace testutil
