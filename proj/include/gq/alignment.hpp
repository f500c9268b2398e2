// Pairwise alignment of padded graphs: the optimal alignment kernel, the
// metric it induces, and the general edit distance, each available through an
// exhaustive exact solver (order-capped) and a seeded greedy + 2-opt
// heuristic sharing one interface.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gq/error.hpp"
#include "gq/graph.hpp"

namespace gq {

enum class SolverKind { exact, heuristic };

/// Alignment solver configuration. The exact solver enumerates all n!
/// permutations and refuses orders beyond exact_limit; the heuristic runs
/// `restarts` local searches and is deterministic given `seed`.
struct Solver {
  SolverKind kind = SolverKind::exact;
  int exact_limit = kDefaultExactLimit;
  int restarts = 16;
  std::uint64_t seed = 0;

  static Solver exact(int limit = kDefaultExactLimit) {
    return Solver{SolverKind::exact, limit, 16, 0};
  }
  static Solver heuristic(int restarts = 16, std::uint64_t seed = 0,
                          int limit = kDefaultExactLimit) {
    return Solver{SolverKind::heuristic, limit, restarts, seed};
  }
};

enum class AlignKind { kernel, edit_cost };

/// A feasible vertex correspondence together with its objective value.
/// For kind == kernel the value lower-bounds the exact optimum, for
/// kind == edit_cost it upper-bounds it; the exact solver attains both.
template <class Scalar = double>
struct Alignment {
  Permutation perm;
  Scalar value;
  AlignKind kind;
};

/// Symmetric nonnegative cost on attribute pairs, zero on equal arguments.
/// Built-ins: squared Euclidean, Euclidean, and a constant cost that charges
/// c for any mismatch (insertions, deletions and substitutions alike); the
/// latter is discontinuous and flagged as such.
template <class Scalar = double>
class AttributeCost {
 public:
  using Vector = VectorX<Scalar>;
  using Fn = std::function<Scalar(const Vector&, const Vector&)>;

  static AttributeCost squared_euclidean() { return AttributeCost(Builtin::sq_euclid, 0, "sqeuclid", true); }
  static AttributeCost euclidean() { return AttributeCost(Builtin::euclid, 0, "euclid", true); }
  static AttributeCost constant_indel(Scalar c) {
    if (!(c > 0)) throw ConfigError("indel cost must be positive");
    return AttributeCost(Builtin::indel, c, "indel:" + format(c), false);
  }
  static AttributeCost custom(std::string name, Fn fn, bool continuous = true) {
    AttributeCost out(Builtin::custom, 0, std::move(name), continuous);
    out.fn_ = std::move(fn);
    return out;
  }

  /// Accepts "sqeuclid", "euclid", "indel:<c>" (also "indel(<c>)").
  static AttributeCost parse(const std::string& spec) {
    if (spec == "sqeuclid") return squared_euclidean();
    if (spec == "euclid") return euclidean();
    if (spec.rfind("indel", 0) == 0) {
      std::string arg;
      if (spec.size() > 6 && spec[5] == ':') arg = spec.substr(6);
      else if (spec.size() > 7 && spec[5] == '(' && spec.back() == ')') arg = spec.substr(6, spec.size() - 7);
      else throw ConfigError("malformed indel cost, expected indel:<c>");
      try {
        return constant_indel(static_cast<Scalar>(std::stod(arg)));
      } catch (const std::logic_error&) {
        throw ConfigError("malformed indel cost parameter '" + arg + "'");
      }
    }
    throw ConfigError("unknown attribute cost '" + spec + "'");
  }

  Scalar operator()(const Vector& a, const Vector& b) const {
    if (a.size() != b.size()) throw DimensionMismatch("attribute cost on vectors of different dimension");
    switch (kind_) {
      case Builtin::sq_euclid: return (a - b).squaredNorm();
      case Builtin::euclid: return (a - b).norm();
      case Builtin::indel: return (a.array() == b.array()).all() ? Scalar(0) : c_;
      case Builtin::custom: return fn_(a, b);
    }
    return Scalar(0);
  }

  /// Cost between cell (i, j) of x and cell (pi, pj) of y without
  /// materializing the attribute vectors (the solvers' inner loop).
  Scalar cell_cost(const GraphMatrix<Scalar>& x, Eigen::Index i, Eigen::Index j,
                   const GraphMatrix<Scalar>& y, Eigen::Index pi, Eigen::Index pj) const {
    switch (kind_) {
      case Builtin::sq_euclid: {
        Scalar acc = 0;
        for (Eigen::Index c = 0; c < x.attr_dim(); ++c) {
          const Scalar d = x.slice(c)(i, j) - y.slice(c)(pi, pj);
          acc += d * d;
        }
        return acc;
      }
      case Builtin::euclid: {
        Scalar acc = 0;
        for (Eigen::Index c = 0; c < x.attr_dim(); ++c) {
          const Scalar d = x.slice(c)(i, j) - y.slice(c)(pi, pj);
          acc += d * d;
        }
        using std::sqrt;
        return sqrt(acc);
      }
      case Builtin::indel: {
        for (Eigen::Index c = 0; c < x.attr_dim(); ++c) {
          if (x.slice(c)(i, j) != y.slice(c)(pi, pj)) return c_;
        }
        return Scalar(0);
      }
      case Builtin::custom: return fn_(x.cell(i, j), y.cell(pi, pj));
    }
    return Scalar(0);
  }

  const std::string& name() const { return name_; }
  bool continuous() const { return continuous_; }
  Scalar indel_parameter() const { return c_; }

 private:
  enum class Builtin { sq_euclid, euclid, indel, custom };

  AttributeCost(Builtin kind, Scalar c, std::string name, bool continuous)
      : kind_(kind), c_(c), name_(std::move(name)), continuous_(continuous) {}

  static std::string format(Scalar c) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", static_cast<double>(c));
    return buf;
  }

  Builtin kind_;
  Scalar c_;
  std::string name_;
  bool continuous_;
  Fn fn_;
};

namespace detail {

template <class Scalar>
Scalar kernel_value(const GraphMatrix<Scalar>& x, const GraphMatrix<Scalar>& y,
                    const std::vector<int>& p) {
  const Eigen::Index n = x.order();
  Scalar acc = 0;
  for (Eigen::Index c = 0; c < x.attr_dim(); ++c) {
    const auto& xs = x.slice(c);
    const auto& ys = y.slice(c);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index pi = p[static_cast<size_t>(i)];
      for (Eigen::Index j = 0; j < n; ++j) {
        acc += xs(i, j) * ys(pi, p[static_cast<size_t>(j)]);
      }
    }
  }
  return acc;
}

template <class Scalar>
Scalar cost_value(const GraphMatrix<Scalar>& x, const GraphMatrix<Scalar>& y,
                  const std::vector<int>& p, const AttributeCost<Scalar>& cost) {
  const Eigen::Index n = x.order();
  Scalar acc = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index pi = p[static_cast<size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) {
      acc += cost.cell_cost(x, i, j, y, pi, p[static_cast<size_t>(j)]);
    }
  }
  return acc;
}

inline void check_exact_feasible(Eigen::Index order, const Solver& solver) {
  if (order > solver.exact_limit) {
    throw ExactLimitExceeded("order " + std::to_string(order) + " exceeds exact solver limit " +
                             std::to_string(solver.exact_limit));
  }
}

}  // namespace detail

/// Kernel of a fixed alignment: the Frobenius inner product of x with the
/// relabeled y, i.e. the sum over all ordered cell pairs of attribute dot
/// products with vertex i of x matched to vertex p(i) of y. Summing over all
/// ordered pairs means an undirected common edge contributes twice.
template <class Scalar>
Scalar kernel_of_alignment(const GraphMatrix<Scalar>& x, const GraphMatrix<Scalar>& y,
                           const Permutation& p) {
  require_same_shape(x, y);
  if (p.size() != x.order()) throw DimensionMismatch("permutation size differs from matrix order");
  return detail::kernel_value(x, y, p.indices());
}

/// Alignment cost of a fixed correspondence under an attribute cost.
template <class Scalar>
Scalar cost_of_alignment(const GraphMatrix<Scalar>& x, const GraphMatrix<Scalar>& y,
                         const Permutation& p, const AttributeCost<Scalar>& cost) {
  require_same_shape(x, y);
  if (p.size() != x.order()) throw DimensionMismatch("permutation size differs from matrix order");
  return detail::cost_value(x, y, p.indices(), cost);
}

enum class AlignObjective { max_kernel, min_cost };

/// Greedy seeded construction plus pairwise-swap (2-opt) local search over
/// several restarts. Restart 0 starts from the identity, restart 1 from a
/// deterministic greedy assignment, later restarts from random permutations,
/// so results only improve as `restarts` grows and are reproducible given
/// the seed. Returns a feasible alignment: its kernel value lower-bounds the
/// exact optimum, its edit cost upper-bounds it.
template <class Scalar>
Alignment<Scalar> heuristic_align(const GraphMatrix<Scalar>& x, const GraphMatrix<Scalar>& y,
                                  AlignObjective objective, int restarts = 16,
                                  std::uint64_t seed = 0,
                                  const AttributeCost<Scalar>& cost = AttributeCost<Scalar>::squared_euclidean()) {
  require_same_shape(x, y);
  if (restarts < 1) throw ConfigError("heuristic alignment needs restarts >= 1");
  const int n = static_cast<int>(x.order());

  // Score to maximize; min-cost searches maximize the negated cost.
  auto score = [&](const std::vector<int>& p) -> Scalar {
    return objective == AlignObjective::max_kernel ? detail::kernel_value(x, y, p)
                                                   : -detail::cost_value(x, y, p, cost);
  };
  // Contribution of assigning x-vertex i to y-vertex j given the partial map.
  auto marginal = [&](int i, int j, const std::vector<int>& assign, int filled) -> Scalar {
    Scalar acc = 0;
    if (objective == AlignObjective::max_kernel) {
      for (Eigen::Index c = 0; c < x.attr_dim(); ++c) {
        const auto& xs = x.slice(c);
        const auto& ys = y.slice(c);
        acc += xs(i, i) * ys(j, j);
        for (int k = 0; k < filled; ++k) {
          const int jk = assign[static_cast<size_t>(k)];
          acc += xs(i, k) * ys(j, jk) + xs(k, i) * ys(jk, j);
        }
      }
    } else {
      acc -= cost.cell_cost(x, i, i, y, j, j);
      for (int k = 0; k < filled; ++k) {
        const int jk = assign[static_cast<size_t>(k)];
        acc -= cost.cell_cost(x, i, k, y, j, jk) + cost.cell_cost(x, k, i, y, jk, j);
      }
    }
    return acc;
  };

  auto greedy_start = [&]() {
    std::vector<int> assign(static_cast<size_t>(n), -1);
    std::vector<char> used(static_cast<size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
      int best_j = -1;
      Scalar best_m = -std::numeric_limits<Scalar>::infinity();
      for (int j = 0; j < n; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        const Scalar m = marginal(i, j, assign, i);
        if (m > best_m) {
          best_m = m;
          best_j = j;
        }
      }
      assign[static_cast<size_t>(i)] = best_j;
      used[static_cast<size_t>(best_j)] = 1;
    }
    return assign;
  };

  auto local_search = [&](std::vector<int> p) {
    Scalar cur = score(p);
    for (;;) {
      Scalar best_gain = 0;
      int best_a = -1, best_b = -1;
      for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
          std::swap(p[static_cast<size_t>(a)], p[static_cast<size_t>(b)]);
          const Scalar s = score(p);
          std::swap(p[static_cast<size_t>(a)], p[static_cast<size_t>(b)]);
          if (s - cur > best_gain) {
            best_gain = s - cur;
            best_a = a;
            best_b = b;
          }
        }
      }
      if (best_a < 0) break;
      std::swap(p[static_cast<size_t>(best_a)], p[static_cast<size_t>(best_b)]);
      cur = score(p);
    }
    return std::make_pair(std::move(p), cur);
  };

  std::mt19937_64 rng(seed);
  std::vector<int> start(static_cast<size_t>(n));
  std::iota(start.begin(), start.end(), 0);

  Scalar best_score = -std::numeric_limits<Scalar>::infinity();
  std::vector<int> best_perm;
  for (int r = 0; r < restarts; ++r) {
    std::vector<int> p;
    if (r == 0) {
      p = start;  // identity
    } else if (r == 1) {
      p = greedy_start();
    } else {
      p = start;
      std::shuffle(p.begin(), p.end(), rng);
    }
    auto [perm, sc] = local_search(std::move(p));
    if (sc > best_score || (sc == best_score && perm < best_perm)) {
      best_score = sc;
      best_perm = std::move(perm);
    }
  }

  if (objective == AlignObjective::max_kernel) {
    return Alignment<Scalar>{Permutation(std::move(best_perm)), best_score, AlignKind::kernel};
  }
  return Alignment<Scalar>{Permutation(std::move(best_perm)), -best_score, AlignKind::edit_cost};
}

/// Maximum alignment kernel k(X, Y). The exact solver scans all n!
/// correspondences and returns the lexicographically smallest maximizer.
template <class Scalar>
Alignment<Scalar> optimal_kernel(const GraphMatrix<Scalar>& x, const GraphMatrix<Scalar>& y,
                                 const Solver& solver = Solver::exact()) {
  require_same_shape(x, y);
  if (solver.kind == SolverKind::heuristic) {
    return heuristic_align(x, y, AlignObjective::max_kernel, solver.restarts, solver.seed);
  }
  detail::check_exact_feasible(x.order(), solver);
  const int n = static_cast<int>(x.order());
  std::vector<int> p(static_cast<size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  std::vector<int> best_perm;
  do {
    const Scalar v = detail::kernel_value(x, y, p);
    if (v > best) {
      best = v;
      best_perm = p;
    }
  } while (std::next_permutation(p.begin(), p.end()));
  return Alignment<Scalar>{Permutation(std::move(best_perm)), best, AlignKind::kernel};
}

/// l(X) = sqrt(k(X, X)): the Frobenius norm, equal for every representation
/// of the same graph.
template <class Scalar>
Scalar length(const GraphMatrix<Scalar>& x) {
  return norm(x);
}

/// Radicand of the induced metric, with the tolerated floating-point
/// undershoot clamped to zero. A radicand below -1e-9 * (l(x)^2 + l(y)^2)
/// indicates a broken kernel value and raises NumericalError.
template <class Scalar>
Scalar distance_sq_from_kernel(Scalar lx_sq, Scalar kernel, Scalar ly_sq) {
  const Scalar r = lx_sq - 2 * kernel + ly_sq;
  const Scalar scale = lx_sq + ly_sq;
  if (r < Scalar(-1e-9) * scale) {
    throw NumericalError("negative squared distance beyond tolerance; kernel value " +
                         std::to_string(static_cast<double>(kernel)) + " is not a valid lower bound");
  }
  return r < 0 ? Scalar(0) : r;
}

/// Metric induced by the optimal alignment kernel:
/// d(X, Y) = sqrt(l(X)^2 - 2 k(X, Y) + l(Y)^2), which for the exact solver
/// equals the minimum Frobenius distance over all relabelings of y.
template <class Scalar>
Scalar kernel_metric(const GraphMatrix<Scalar>& x, const GraphMatrix<Scalar>& y,
                     const Solver& solver = Solver::exact()) {
  const Alignment<Scalar> a = optimal_kernel(x, y, solver);
  using std::sqrt;
  return sqrt(distance_sq_from_kernel(squared_norm(x), a.value, squared_norm(y)));
}

/// General edit distance at the shared padded order: the minimum over vertex
/// correspondences of the summed attribute costs over all ordered pairs.
/// With the squared Euclidean cost this equals kernel_metric squared.
template <class Scalar>
Alignment<Scalar> edit_distance(const GraphMatrix<Scalar>& x, const GraphMatrix<Scalar>& y,
                                const AttributeCost<Scalar>& cost,
                                const Solver& solver = Solver::exact()) {
  require_same_shape(x, y);
  if (solver.kind == SolverKind::heuristic) {
    return heuristic_align(x, y, AlignObjective::min_cost, solver.restarts, solver.seed, cost);
  }
  detail::check_exact_feasible(x.order(), solver);
  const int n = static_cast<int>(x.order());
  std::vector<int> p(static_cast<size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  Scalar best = std::numeric_limits<Scalar>::infinity();
  std::vector<int> best_perm;
  do {
    const Scalar v = detail::cost_value(x, y, p, cost);
    if (v < best) {
      best = v;
      best_perm = p;
    }
  } while (std::next_permutation(p.begin(), p.end()));
  return Alignment<Scalar>{Permutation(std::move(best_perm)), best, AlignKind::edit_cost};
}

using Alignmentd = Alignment<double>;
using AttributeCostd = AttributeCost<double>;

}  // namespace gq
