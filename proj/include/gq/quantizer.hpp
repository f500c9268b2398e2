// Codebooks, nearest-neighbor encoding, empirical distortion, the k-means
// and stochastic generalized gradient trainers, and the Lloyd-Max audits.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gq/alignment.hpp"
#include "gq/graph.hpp"

namespace gq {

/// Distortion measure used by encoders and trainers. sq_metric is the
/// squared kernel-induced metric (the trainable default), metric its square
/// root (evaluation only), edit a general edit distance under a pluggable
/// attribute cost.
struct Distortion {
  enum class Kind { sq_metric, metric, edit };

  Kind kind = Kind::sq_metric;
  AttributeCostd cost = AttributeCostd::squared_euclidean();

  static Distortion sq_metric() { return Distortion{}; }
  static Distortion metric() { return Distortion{Kind::metric, AttributeCostd::squared_euclidean()}; }
  static Distortion edit(AttributeCostd c) { return Distortion{Kind::edit, std::move(c)}; }

  bool continuous() const { return kind != Kind::edit || cost.continuous(); }
  std::string name() const {
    switch (kind) {
      case Kind::sq_metric: return "sq_metric";
      case Kind::metric: return "metric";
      case Kind::edit: return "edit(" + cost.name() + ")";
    }
    return "";
  }
};

/// Ordered set of code graphs plus how they were produced.
struct Codebook {
  std::vector<GraphMatrixd> code_graphs;
  std::string trainer = "manual";
  std::uint64_t seed = 0;
  int iterations = 0;
  std::vector<double> distortion_history;

  Eigen::Index k() const { return static_cast<Eigen::Index>(code_graphs.size()); }
  Eigen::Index order() const { return code_graphs.empty() ? 0 : code_graphs.front().order(); }
  Eigen::Index attr_dim() const { return code_graphs.empty() ? 0 : code_graphs.front().attr_dim(); }
};

/// Result of encoding one sample: the winning region, its distortion, and
/// the alignment that realized it. The alignment permutation maps slots of
/// the winning code graph to vertices of the sample, so act(perm, sample) is
/// the sample expressed in the code graph's frame.
struct EncodeResult {
  Eigen::Index index = 0;
  double distortion = 0;
  Alignmentd alignment{Permutation::identity(0), 0, AlignKind::kernel};
};

struct TrainerConfig {
  enum class Init { sample_k_distinct, provided };

  Eigen::Index k = 1;
  Distortion distortion = Distortion::sq_metric();
  Solver solver = Solver::exact();
  Init init = Init::sample_k_distinct;
  std::vector<GraphMatrixd> provided;  // used when init == provided
  std::uint64_t seed = 0;
  struct {
    int max_iters = 100;
    double rel_tol = 1e-6;
  } kmeans;
  struct {
    int epochs = 50;
    double a = 1.0;  // step size schedule eta_t = a / (b + t)
    double b = 1.0;
  } sgg;
  bool allow_discontinuous = false;
  std::function<void(int, double)> progress;  // (iteration or epoch, distortion)

  /// Structural invariants, including the step-size conditions the schedule
  /// form guarantees: a > 0 and b >= 0 make eta_t = a/(b+t) positive,
  /// vanishing, divergent in sum and square-summable.
  void validate() const;
};

struct DistortionReport {
  double mean = 0;
  std::size_t samples = 0;
  std::vector<std::size_t> region_counts;
  std::vector<double> region_means;
};

EncodeResult encode(const Codebook& cb, const GraphMatrixd& x, const Solver& solver,
                    const Distortion& distortion = Distortion::sq_metric());

DistortionReport empirical_distortion(const Codebook& cb, std::span<const GraphMatrixd> data,
                                      const Solver& solver,
                                      const Distortion& distortion = Distortion::sq_metric());

/// Lloyd iteration: assign by nearest code graph, update each code graph to
/// the arithmetic mean of the representations of its members relabeled into
/// its frame. Empty regions are reseeded with the worst-quantized sample.
/// The recorded distortion history is non-increasing.
Codebook kmeans_fit(std::span<const GraphMatrixd> data, const TrainerConfig& config);

/// Stochastic generalized gradient descent: per step, move the nearest code
/// graph toward the frame-aligned sample by eta_t = a / (b + t). History is
/// recorded at epoch boundaries, starting with the initial codebook.
Codebook sgg_fit(std::span<const GraphMatrixd> data, const TrainerConfig& config);

struct NnAuditReport {
  int trials = 0;
  std::size_t violations = 0;
  double nn_distortion = 0;
  double min_random_distortion = 0;
};

/// Draws random region assignments and checks each has empirical distortion
/// no better than nearest-neighbor encoding (hard inequality up to 1e-12).
NnAuditReport audit_nearest_neighbor(const Codebook& cb, std::span<const GraphMatrixd> data,
                                     int trials, std::uint64_t seed, const Solver& solver,
                                     const Distortion& distortion = Distortion::sq_metric());

struct CentroidAuditReport {
  struct Region {
    std::size_t count = 0;
    double conditional_mean = 0;
    double max_improvement = 0;
  };
  std::vector<Region> regions;
  double radius = 0;
  int perturbations = 0;

  std::size_t improving_regions(double tol = 1e-9) const {
    std::size_t n = 0;
    for (const auto& r : regions) n += r.max_improvement > tol ? 1 : 0;
    return n;
  }
};

/// Local centroid audit under the squared metric: perturbs each code graph
/// within the given radius and reports the largest drop of its region's
/// conditional distortion. A converged k-means codebook should admit none
/// beyond rounding.
CentroidAuditReport audit_centroid(const Codebook& cb, std::span<const GraphMatrixd> data,
                                   int perturbations, double radius, std::uint64_t seed,
                                   const Solver& solver);

}  // namespace gq
