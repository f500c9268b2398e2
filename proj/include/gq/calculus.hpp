// Generalized gradients of alignment-induced distortions: a selected
// first-order object for the squared metric and for the min-over-codebook
// loss, plus a finite-difference verifier.
#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <utility>

#include "gq/alignment.hpp"
#include "gq/graph.hpp"

namespace gq {

enum class GradSource { distance_sq, loss };

/// One selected generalized gradient: the matrix 2 (y - aligned x) together
/// with the alignment that selected it. At points where the optimal
/// alignment is unique this is the classical gradient in y.
template <class Scalar = double>
struct GeneralizedGradient {
  GraphMatrix<Scalar> matrix;
  Permutation witness;
  GradSource source = GradSource::distance_sq;
};

/// Gradient of y -> d(x, y)^2: aligns x toward the fixed y (the witness
/// maximizes the kernel of y against relabelings of x) and returns
/// 2 (y - act(witness, x)). Zero exactly when x and y share an orbit.
template <class Scalar>
GeneralizedGradient<Scalar> grad_distance_sq(const GraphMatrix<Scalar>& y,
                                             const GraphMatrix<Scalar>& x,
                                             const Solver& solver = Solver::exact()) {
  const Alignment<Scalar> a = optimal_kernel(y, x, solver);
  GraphMatrix<Scalar> g = y;
  g -= act(a.perm, x);
  g *= Scalar(2);
  return GeneralizedGradient<Scalar>{std::move(g), a.perm, GradSource::distance_sq};
}

/// Gradient selection for the loss min_j d(x, Y_j)^2: the winning code graph
/// (lowest index on ties) receives grad_distance_sq(Y_winner, x); every other
/// code graph receives the zero gradient, a valid choice under the
/// min-composition rule. Returns (winner index, gradient of the winner).
template <class Scalar>
std::pair<Eigen::Index, GeneralizedGradient<Scalar>> grad_loss(
    std::span<const GraphMatrix<Scalar>> codebook, const GraphMatrix<Scalar>& x,
    const Solver& solver = Solver::exact()) {
  if (codebook.empty()) throw InsufficientData("grad_loss needs a nonempty codebook");
  const Scalar lx_sq = squared_norm(x);
  Eigen::Index winner = -1;
  Scalar best = 0;
  Alignment<Scalar> best_align{Permutation::identity(static_cast<int>(x.order())), 0, AlignKind::kernel};
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(codebook.size()); ++j) {
    const Alignment<Scalar> a = optimal_kernel(codebook[static_cast<size_t>(j)], x, solver);
    const Scalar d_sq =
        distance_sq_from_kernel(squared_norm(codebook[static_cast<size_t>(j)]), a.value, lx_sq);
    if (winner < 0 || d_sq < best) {
      winner = j;
      best = d_sq;
      best_align = a;
    }
  }
  GraphMatrix<Scalar> g = codebook[static_cast<size_t>(winner)];
  g -= act(best_align.perm, x);
  g *= Scalar(2);
  return {winner, GeneralizedGradient<Scalar>{std::move(g), best_align.perm, GradSource::loss}};
}

template <class Scalar = double>
struct FdReport {
  Scalar max_deviation = 0;   // over alignment-stable directions
  int directions_checked = 0;
  int unstable_skipped = 0;
  bool unstable_alignment = false;
};

template <class Scalar = double>
struct FdOptions {
  int random_directions = 8;
  int max_basis_directions = 32;
  std::uint64_t seed = 0;
  /// Optional: returns the optimal-alignment witness at a point. A direction
  /// counts as stable only when the witness agrees at y, y + h e and y - h e.
  std::function<Permutation(const GraphMatrix<Scalar>&)> witness_probe;
};

/// Compares forward differences (f(y + h e) - f(y)) / h against <g, e> over
/// unit cell directions plus seeded random directions. Directions where the
/// optimal alignment flips are skipped and flagged; the report carries the
/// largest deviation among the stable ones and is independent of direction
/// order.
template <class Scalar>
FdReport<Scalar> fd_check(const std::function<Scalar(const GraphMatrix<Scalar>&)>& f,
                          const GraphMatrix<Scalar>& y, const GeneralizedGradient<Scalar>& g,
                          Scalar h, const FdOptions<Scalar>& opts = {}) {
  if (!(h > 0)) throw ConfigError("finite-difference step must be positive");
  require_same_shape(y, g.matrix);

  std::vector<GraphMatrix<Scalar>> directions;
  const Eigen::Index n = y.order();
  const Eigen::Index dim = y.attr_dim();
  const Eigen::Index total = dim * n * n;
  const Eigen::Index stride =
      total <= opts.max_basis_directions ? 1 : (total + opts.max_basis_directions - 1) / opts.max_basis_directions;
  for (Eigen::Index flat = 0; flat < total; flat += stride) {
    GraphMatrix<Scalar> e(n, dim);
    const Eigen::Index c = flat / (n * n);
    const Eigen::Index i = (flat / n) % n;
    const Eigen::Index j = flat % n;
    e.slice(c)(i, j) = 1;
    directions.push_back(std::move(e));
  }
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int r = 0; r < opts.random_directions; ++r) {
    GraphMatrix<Scalar> e(n, dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) e.slice(c)(i, j) = static_cast<Scalar>(gauss(rng));
      }
    }
    const Scalar nrm = norm(e);
    if (nrm > 0) e *= Scalar(1) / nrm;
    directions.push_back(std::move(e));
  }

  FdReport<Scalar> report;
  const Scalar f0 = f(y);
  Permutation w0 = opts.witness_probe ? opts.witness_probe(y) : Permutation::identity(static_cast<int>(n));
  for (const auto& e : directions) {
    GraphMatrix<Scalar> forward = y;
    forward += e * h;
    if (opts.witness_probe) {
      GraphMatrix<Scalar> backward = y;
      backward -= e * h;
      if (opts.witness_probe(forward) != w0 || opts.witness_probe(backward) != w0) {
        ++report.unstable_skipped;
        report.unstable_alignment = true;
        continue;
      }
    }
    const Scalar fd = (f(forward) - f0) / h;
    const Scalar dd = frobenius(g.matrix, e);
    using std::abs;
    const Scalar dev = abs(fd - dd);
    if (dev > report.max_deviation) report.max_deviation = dev;
    ++report.directions_checked;
  }
  return report;
}

}  // namespace gq
