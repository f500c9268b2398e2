// Consistency-trend experiments: train codebooks on growing sample ladders,
// score them on a large held-out sample, and check that the median gap to
// the generating prototypes does not grow.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gq/generator.hpp"
#include "gq/quantizer.hpp"

namespace gq {

struct ExperimentPlan {
  MixtureSpec generator;
  std::vector<std::size_t> sample_sizes;  // strictly increasing
  int replications = 5;
  std::vector<std::string> trainers = {"kmeans", "sgg"};
  TrainerConfig trainer;  // shared knobs; per-run seeds are derived
  std::uint64_t seed = 0;
  std::string name;

  void validate() const;
};

ExperimentPlan read_plan(std::istream& in);
ExperimentPlan load_plan(const std::filesystem::path& path);

struct TrendCheck {
  bool ok = true;
  int inversions = 0;
  double worst_excess = 0;  // relative to the largest |median| on the ladder
};

/// Non-increasing up to at most one inversion of at most 5% of the trend
/// scale (the largest absolute median on the ladder).
TrendCheck check_trend(const std::vector<double>& medians);

struct ExperimentResult {
  struct Point {
    std::size_t n = 0;
    std::vector<double> proxy;  // held-out distortion per replication
    std::vector<double> gap;    // proxy minus the prototype baseline
    double median_proxy = 0;
    double median_gap = 0;
    double exact_median_gap = 0;  // populated when a verify solver is given
  };
  struct Trend {
    std::string trainer;
    std::vector<Point> points;
    TrendCheck check;
    TrendCheck exact_check;  // meaningful only when verified
  };

  std::size_t heldout_size = 0;
  double baseline_proxy = 0;  // median prototype-codebook held-out distortion
  bool verified = false;
  std::vector<Trend> trends;

  bool all_ok() const {
    for (const auto& t : trends) {
      if (!t.check.ok || (verified && !t.exact_check.ok)) return false;
    }
    return true;
  }
};

/// Runs the full ladder. Replication r draws its RNG stream from
/// plan.seed ^ r: first the held-out seed, then a data seed and a trainer
/// seed per ladder rung, in ascending-N order. When `verify` is given, every
/// trained codebook is re-scored on the held-out sample with that solver as
/// an independent check of the heuristic numbers.
ExperimentResult consistency_experiment(const ExperimentPlan& plan,
                                        const Solver* verify = nullptr);

double median(std::vector<double> values);

}  // namespace gq
