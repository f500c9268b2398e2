#include "gq/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gq {

namespace {

void require_uniform(std::span<const GraphMatrixd> data) {
  if (data.empty()) throw InsufficientData("empty sample set");
  for (const auto& x : data) require_same_shape(data.front(), x);
}

void require_compatible(const Codebook& cb, const GraphMatrixd& x) {
  if (cb.code_graphs.empty()) throw InsufficientData("empty codebook");
  for (const auto& y : cb.code_graphs) require_same_shape(y, x);
}

// Distortion of sample x against code graph y, plus the alignment that
// realized it (mapping y's frame onto x).
double value_with_alignment(const GraphMatrixd& y, const GraphMatrixd& x, const Solver& solver,
                            const Distortion& dist, Alignmentd& out) {
  if (dist.kind == Distortion::Kind::edit) {
    out = edit_distance(y, x, dist.cost, solver);
    return out.value;
  }
  out = optimal_kernel(y, x, solver);
  const double d_sq = distance_sq_from_kernel(squared_norm(y), out.value, squared_norm(x));
  return dist.kind == Distortion::Kind::metric ? std::sqrt(d_sq) : d_sq;
}

// Same distortion under a fixed, already-known alignment (no solve).
double value_under_alignment(const GraphMatrixd& y, const GraphMatrixd& x, const Permutation& p,
                             const Distortion& dist) {
  if (dist.kind == Distortion::Kind::edit) return cost_of_alignment(y, x, p, dist.cost);
  const double k = kernel_of_alignment(y, x, p);
  const double d_sq = distance_sq_from_kernel(squared_norm(y), k, squared_norm(x));
  return dist.kind == Distortion::Kind::metric ? std::sqrt(d_sq) : d_sq;
}

void check_trainable(const TrainerConfig& cfg) {
  cfg.validate();
  if (cfg.distortion.kind == Distortion::Kind::metric) {
    throw ConfigError("the plain metric distortion is evaluation-only; train with sq_metric or edit");
  }
  if (!cfg.distortion.continuous() && !cfg.allow_discontinuous) {
    throw DiscontinuousDistortion(
        "edit cost '" + cfg.distortion.cost.name() +
        "' is discontinuous and empirical-distortion training with it can be inconsistent; "
        "set allow_discontinuous to proceed anyway");
  }
}

// Seeded initialization: draw k distinct training graphs, rejecting repeats
// of an already chosen graph. Distinctness is checked up to vertex
// relabeling when the order admits exhaustive search, bitwise otherwise.
std::vector<GraphMatrixd> init_codebook(std::span<const GraphMatrixd> data,
                                        const TrainerConfig& cfg, std::mt19937_64& rng) {
  if (cfg.init == TrainerConfig::Init::provided) {
    if (static_cast<Eigen::Index>(cfg.provided.size()) != cfg.k) {
      throw ConfigError("provided initialization must contain exactly k code graphs");
    }
    for (const auto& y : cfg.provided) require_same_shape(data.front(), y);
    return cfg.provided;
  }
  const bool can_orbit_check = data.front().order() <= cfg.solver.exact_limit;
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  std::vector<GraphMatrixd> chosen;
  std::vector<std::size_t> chosen_idx;
  long attempts = 0;
  const long attempt_limit = 100 * static_cast<long>(data.size() + static_cast<std::size_t>(cfg.k));
  while (static_cast<Eigen::Index>(chosen.size()) < cfg.k) {
    if (++attempts > attempt_limit) {
      throw InsufficientData("could not draw k distinct training graphs");
    }
    const std::size_t idx = pick(rng);
    if (std::find(chosen_idx.begin(), chosen_idx.end(), idx) != chosen_idx.end()) continue;
    bool dup = false;
    for (const auto& y : chosen) {
      dup = can_orbit_check ? orbit_equal(y, data[idx], cfg.solver.exact_limit) : y == data[idx];
      if (dup) break;
    }
    if (dup) continue;
    chosen.push_back(data[idx]);
    chosen_idx.push_back(idx);
  }
  return chosen;
}

struct Assignment {
  Eigen::Index region;
  Permutation perm;
  double value;
};

}  // namespace

void TrainerConfig::validate() const {
  if (k < 1) throw ConfigError("k must be at least 1");
  if (!(sgg.a > 0)) throw ConfigError("step schedule requires a > 0");
  if (!(sgg.b >= 0)) throw ConfigError("step schedule requires b >= 0");
  if (sgg.epochs < 0) throw ConfigError("epochs must be nonnegative");
  if (!(kmeans.rel_tol > 0)) throw ConfigError("rel_tol must be positive");
  if (kmeans.max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (solver.restarts < 1) throw ConfigError("solver restarts must be at least 1");
}

EncodeResult encode(const Codebook& cb, const GraphMatrixd& x, const Solver& solver,
                    const Distortion& distortion) {
  require_compatible(cb, x);
  EncodeResult best;
  bool first = true;
  for (Eigen::Index j = 0; j < cb.k(); ++j) {
    Alignmentd a{Permutation::identity(static_cast<int>(x.order())), 0, AlignKind::kernel};
    const double v = value_with_alignment(cb.code_graphs[static_cast<size_t>(j)], x, solver,
                                          distortion, a);
    if (first || v < best.distortion) {
      best = EncodeResult{j, v, a};
      first = false;
    }
  }
  return best;
}

DistortionReport empirical_distortion(const Codebook& cb, std::span<const GraphMatrixd> data,
                                      const Solver& solver, const Distortion& distortion) {
  require_uniform(data);
  DistortionReport report;
  report.samples = data.size();
  report.region_counts.assign(static_cast<size_t>(cb.k()), 0);
  std::vector<double> region_totals(static_cast<size_t>(cb.k()), 0.0);
  double total = 0;
  for (const auto& x : data) {
    const EncodeResult r = encode(cb, x, solver, distortion);
    total += r.distortion;
    region_totals[static_cast<size_t>(r.index)] += r.distortion;
    ++report.region_counts[static_cast<size_t>(r.index)];
  }
  report.mean = total / static_cast<double>(data.size());
  report.region_means.resize(static_cast<size_t>(cb.k()), 0.0);
  for (size_t j = 0; j < region_totals.size(); ++j) {
    report.region_means[j] = report.region_counts[j] == 0
                                 ? 0.0
                                 : region_totals[j] / static_cast<double>(report.region_counts[j]);
  }
  return report;
}

Codebook kmeans_fit(std::span<const GraphMatrixd> data, const TrainerConfig& cfg) {
  check_trainable(cfg);
  require_uniform(data);
  if (static_cast<Eigen::Index>(data.size()) < cfg.k) {
    throw InsufficientData("k-means needs at least k samples");
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<GraphMatrixd> code = init_codebook(data, cfg, rng);
  const Eigen::Index n = data.front().order();
  const Eigen::Index dim = data.front().attr_dim();

  std::vector<Assignment> assign(
      data.size(), Assignment{0, Permutation::identity(static_cast<int>(n)), 0.0});
  std::vector<double> history;

  for (int iter = 0; iter < cfg.kmeans.max_iters; ++iter) {
    Codebook view{code, "kmeans", cfg.seed, iter, {}};
    double total = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      EncodeResult r = encode(view, data[i], cfg.solver, cfg.distortion);
      if (iter > 0) {
        // Keeping the previous alignment as a candidate makes the recorded
        // distortion non-increasing even when the heuristic solver misses it.
        const Assignment& prev = assign[i];
        const double inherited = value_under_alignment(
            code[static_cast<size_t>(prev.region)], data[i], prev.perm, cfg.distortion);
        if (inherited < r.distortion) {
          r = EncodeResult{prev.region, inherited,
                           Alignmentd{prev.perm, inherited, r.alignment.kind}};
        }
      }
      assign[i] = Assignment{r.index, r.alignment.perm, r.distortion};
      total += r.distortion;
    }
    const double mean = total / static_cast<double>(data.size());
    history.push_back(mean);
    if (cfg.progress) cfg.progress(iter, mean);

    if (iter > 0) {
      const double prev = history[static_cast<size_t>(iter) - 1];
      const double improvement = prev - mean;
      if (prev == 0.0 || improvement < cfg.kmeans.rel_tol * prev) break;
    } else if (mean == 0.0) {
      break;
    }

    // Mean update in each code graph's own frame.
    std::vector<GraphMatrixd> sums(static_cast<size_t>(cfg.k), GraphMatrixd(n, dim));
    std::vector<std::size_t> counts(static_cast<size_t>(cfg.k), 0);
    for (std::size_t i = 0; i < data.size(); ++i) {
      sums[static_cast<size_t>(assign[i].region)] += act(assign[i].perm, data[i]);
      ++counts[static_cast<size_t>(assign[i].region)];
    }
    std::vector<Eigen::Index> empty;
    for (Eigen::Index j = 0; j < cfg.k; ++j) {
      if (counts[static_cast<size_t>(j)] == 0) {
        empty.push_back(j);
        continue;
      }
      sums[static_cast<size_t>(j)] /= static_cast<double>(counts[static_cast<size_t>(j)]);
      code[static_cast<size_t>(j)] = sums[static_cast<size_t>(j)];
    }
    // Reseed empty regions with the worst-quantized samples.
    std::vector<char> used(data.size(), 0);
    for (Eigen::Index j : empty) {
      std::size_t worst = 0;
      double worst_value = -1;
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (!used[i] && assign[i].value > worst_value) {
          worst_value = assign[i].value;
          worst = i;
        }
      }
      used[worst] = 1;
      code[static_cast<size_t>(j)] = data[worst];
    }
  }

  return Codebook{std::move(code), "kmeans", cfg.seed, static_cast<int>(history.size()),
                  std::move(history)};
}

Codebook sgg_fit(std::span<const GraphMatrixd> data, const TrainerConfig& cfg) {
  check_trainable(cfg);
  require_uniform(data);
  if (static_cast<Eigen::Index>(data.size()) < cfg.k) {
    throw InsufficientData("sgg needs at least k samples");
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<GraphMatrixd> code = init_codebook(data, cfg, rng);

  auto mean_distortion = [&]() {
    Codebook view{code, "sgg", cfg.seed, 0, {}};
    double total = 0;
    for (const auto& x : data) total += encode(view, x, cfg.solver, cfg.distortion).distortion;
    return total / static_cast<double>(data.size());
  };

  std::vector<double> history{mean_distortion()};
  if (cfg.progress) cfg.progress(0, history.front());

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  long t = 0;
  for (int epoch = 1; epoch <= cfg.sgg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      Codebook view{code, "sgg", cfg.seed, 0, {}};
      const EncodeResult r = encode(view, data[idx], cfg.solver, cfg.distortion);
      const GraphMatrixd aligned = act(r.alignment.perm, data[idx]);
      GraphMatrixd& y = code[static_cast<size_t>(r.index)];
      GraphMatrixd step = aligned;
      step -= y;
      if (2.0 * norm(step) > 1e6) {
        throw NumericalError("stochastic gradient norm exceeds the 1e6 cap");
      }
      ++t;
      const double eta = cfg.sgg.a / (cfg.sgg.b + static_cast<double>(t));
      for (Eigen::Index c = 0; c < y.attr_dim(); ++c) {
        y.slice(c) = y.slice(c) + eta * (aligned.slice(c) - y.slice(c));
      }
    }
    history.push_back(mean_distortion());
    if (cfg.progress) cfg.progress(epoch, history.back());
  }

  return Codebook{std::move(code), "sgg", cfg.seed, cfg.sgg.epochs, std::move(history)};
}

NnAuditReport audit_nearest_neighbor(const Codebook& cb, std::span<const GraphMatrixd> data,
                                     int trials, std::uint64_t seed, const Solver& solver,
                                     const Distortion& distortion) {
  if (trials < 1) throw ConfigError("audit needs at least one trial");
  require_uniform(data);
  // One distortion matrix; trials only reshuffle region choices.
  std::vector<std::vector<double>> d(data.size());
  double nn_total = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    d[i].resize(static_cast<size_t>(cb.k()));
    double best = 0;
    for (Eigen::Index j = 0; j < cb.k(); ++j) {
      Alignmentd a{Permutation::identity(static_cast<int>(data[i].order())), 0, AlignKind::kernel};
      d[i][static_cast<size_t>(j)] = value_with_alignment(cb.code_graphs[static_cast<size_t>(j)],
                                                          data[i], solver, distortion, a);
      if (j == 0 || d[i][static_cast<size_t>(j)] < best) best = d[i][static_cast<size_t>(j)];
    }
    nn_total += best;
  }
  const double nn_mean = nn_total / static_cast<double>(data.size());

  NnAuditReport report;
  report.trials = trials;
  report.nn_distortion = nn_mean;
  report.min_random_distortion = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, cb.k() - 1);
  for (int trial = 0; trial < trials; ++trial) {
    double total = 0;
    for (std::size_t i = 0; i < data.size(); ++i) total += d[i][static_cast<size_t>(pick(rng))];
    const double mean = total / static_cast<double>(data.size());
    report.min_random_distortion = std::min(report.min_random_distortion, mean);
    if (mean < nn_mean - 1e-12) ++report.violations;
  }
  return report;
}

CentroidAuditReport audit_centroid(const Codebook& cb, std::span<const GraphMatrixd> data,
                                   int perturbations, double radius, std::uint64_t seed,
                                   const Solver& solver) {
  if (perturbations < 0) throw ConfigError("perturbation count must be nonnegative");
  if (radius < 0) throw ConfigError("radius must be nonnegative");
  require_uniform(data);

  const Distortion dist = Distortion::sq_metric();
  std::vector<std::vector<std::size_t>> members(static_cast<size_t>(cb.k()));
  std::vector<double> totals(static_cast<size_t>(cb.k()), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const EncodeResult r = encode(cb, data[i], solver, dist);
    members[static_cast<size_t>(r.index)].push_back(i);
    totals[static_cast<size_t>(r.index)] += r.distortion;
  }

  CentroidAuditReport report;
  report.radius = radius;
  report.perturbations = perturbations;
  report.regions.resize(static_cast<size_t>(cb.k()));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (Eigen::Index j = 0; j < cb.k(); ++j) {
    auto& region = report.regions[static_cast<size_t>(j)];
    region.count = members[static_cast<size_t>(j)].size();
    if (region.count == 0) continue;
    region.conditional_mean = totals[static_cast<size_t>(j)] / static_cast<double>(region.count);

    const GraphMatrixd& y = cb.code_graphs[static_cast<size_t>(j)];
    for (int p = 0; p < perturbations; ++p) {
      GraphMatrixd dir(y.order(), y.attr_dim());
      for (Eigen::Index c = 0; c < y.attr_dim(); ++c) {
        for (Eigen::Index a = 0; a < y.order(); ++a) {
          for (Eigen::Index b = 0; b < y.order(); ++b) dir.slice(c)(a, b) = gauss(rng);
        }
      }
      const double magnitude = radius * unit(rng);
      const double nrm = norm(dir);
      GraphMatrixd candidate = y;
      if (nrm > 0 && magnitude > 0) candidate += dir * (magnitude / nrm);

      double total = 0;
      for (std::size_t i : members[static_cast<size_t>(j)]) {
        Alignmentd a{Permutation::identity(static_cast<int>(candidate.order())), 0, AlignKind::kernel};
        total += value_with_alignment(candidate, data[i], solver, dist, a);
      }
      const double mean = total / static_cast<double>(region.count);
      region.max_improvement = std::max(region.max_improvement, region.conditional_mean - mean);
    }
  }
  return report;
}

}  // namespace gq
