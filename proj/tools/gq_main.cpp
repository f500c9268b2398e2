// gq: train, evaluate and audit graph codebooks from the command line.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "gq/calculus.hpp"
#include "gq/dataset_io.hpp"
#include "gq/experiment.hpp"
#include "gq/generator.hpp"
#include "gq/quantizer.hpp"

namespace {

std::string sig12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

int env_exact_limit() {
  if (const char* s = std::getenv("GQ_EXACT_LIMIT")) {
    try {
      const int v = std::stoi(s);
      if (v >= 1) return v;
    } catch (const std::logic_error&) {
    }
    throw gq::ConfigError("GQ_EXACT_LIMIT must be a positive integer");
  }
  return gq::kDefaultExactLimit;
}

struct SolverOpts {
  std::string solver = "exact";
  int restarts = 16;
  int exact_limit = gq::kDefaultExactLimit;
  std::uint64_t seed = 0;

  gq::Solver build() const {
    gq::Solver s;
    if (solver == "exact") s.kind = gq::SolverKind::exact;
    else if (solver == "heuristic") s.kind = gq::SolverKind::heuristic;
    else throw gq::ConfigError("unknown solver '" + solver + "'");
    s.exact_limit = exact_limit;
    s.restarts = restarts;
    s.seed = seed;
    return s;
  }
};

void add_solver_opts(CLI::App* cmd, SolverOpts& opts) {
  cmd->add_option("--solver", opts.solver, "Alignment solver: exact|heuristic")
      ->check(CLI::IsMember({"exact", "heuristic"}));
  cmd->add_option("--restarts", opts.restarts, "Heuristic restarts");
  cmd->add_option("--exact-limit", opts.exact_limit, "Exact solver order cap");
}

gq::Distortion build_distortion(const std::string& name, const std::string& cost) {
  if (name == "sq_metric") return gq::Distortion::sq_metric();
  if (name == "metric") return gq::Distortion::metric();
  if (name == "edit") return gq::Distortion::edit(gq::AttributeCostd::parse(cost));
  throw gq::ConfigError("unknown distortion '" + name + "'");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw gq::ParseError("cannot open " + path + " for writing");
  out << text;
}

int run(int argc, char** argv) {
  CLI::App app{"graph quantization toolkit"};
  app.require_subcommand(1);
  const int default_limit = env_exact_limit();

  // train ------------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Fit a codebook on a dataset");
  std::string train_data, train_out, train_trainer = "kmeans";
  std::string train_distortion = "sq_metric", train_cost = "sqeuclid", train_schedule;
  SolverOpts train_solver;
  train_solver.exact_limit = default_limit;
  gq::TrainerConfig cfg;
  long long train_order = -1;
  std::uint64_t train_seed = 0;
  bool verbose = false;
  train->add_option("--data", train_data, "Dataset file (.gq)")->required();
  train->add_option("--out", train_out, "Codebook output file (.gqc)")->required();
  train->add_option("--k", cfg.k, "Codebook size");
  train->add_option("--seed", train_seed, "Trainer seed");
  train->add_option("--trainer", train_trainer, "kmeans|sgg")->check(CLI::IsMember({"kmeans", "sgg"}));
  train->add_option("--distortion", train_distortion, "sq_metric|metric|edit");
  train->add_option("--cost", train_cost, "Edit cost: sqeuclid|euclid|indel:<c>");
  train->add_option("--max-iters", cfg.kmeans.max_iters, "k-means iteration cap");
  train->add_option("--tol", cfg.kmeans.rel_tol, "k-means relative improvement tolerance");
  train->add_option("--epochs", cfg.sgg.epochs, "SGG epochs");
  train->add_option("--schedule", train_schedule, "SGG step schedule a:b");
  train->add_option("--order-bound", train_order, "Pad graphs to this order (default: dataset max)");
  train->add_flag("--allow-discontinuous", cfg.allow_discontinuous,
                  "Permit training with a discontinuous edit cost");
  train->add_flag("--verbose", verbose, "Report per-iteration distortion on stderr");
  add_solver_opts(train, train_solver);

  // encode -----------------------------------------------------------------
  auto* encode_cmd = app.add_subcommand("encode", "Assign dataset graphs to code graphs");
  std::string enc_data, enc_cb, enc_out, enc_distortion = "metric", enc_cost = "sqeuclid";
  SolverOpts enc_solver;
  enc_solver.exact_limit = default_limit;
  std::uint64_t enc_seed = 0;
  encode_cmd->add_option("--data", enc_data)->required();
  encode_cmd->add_option("--codebook", enc_cb)->required();
  encode_cmd->add_option("--out", enc_out, "Also write assignments to this file");
  encode_cmd->add_option("--distortion", enc_distortion, "sq_metric|metric|edit");
  encode_cmd->add_option("--cost", enc_cost);
  encode_cmd->add_option("--seed", enc_seed, "Heuristic solver seed");
  add_solver_opts(encode_cmd, enc_solver);

  // eval -------------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "Empirical distortion report");
  std::string eval_data, eval_cb, eval_distortion = "metric", eval_cost = "sqeuclid";
  SolverOpts eval_solver;
  eval_solver.exact_limit = default_limit;
  std::uint64_t eval_seed = 0;
  eval_cmd->add_option("--data", eval_data)->required();
  eval_cmd->add_option("--codebook", eval_cb)->required();
  eval_cmd->add_option("--distortion", eval_distortion, "sq_metric|metric|edit");
  eval_cmd->add_option("--cost", eval_cost);
  eval_cmd->add_option("--seed", eval_seed, "Heuristic solver seed");
  add_solver_opts(eval_cmd, eval_solver);

  // audit ------------------------------------------------------------------
  auto* audit = app.add_subcommand("audit", "Optimality and gradient audits");
  audit->require_subcommand(1);

  auto* nn = audit->add_subcommand("nn", "Nearest-neighbor optimality audit");
  std::string nn_data, nn_cb, nn_distortion = "sq_metric", nn_cost = "sqeuclid";
  int nn_trials = 100;
  std::uint64_t nn_seed = 0;
  SolverOpts nn_solver;
  nn_solver.exact_limit = default_limit;
  nn->add_option("--data", nn_data)->required();
  nn->add_option("--codebook", nn_cb)->required();
  nn->add_option("--trials", nn_trials);
  nn->add_option("--seed", nn_seed);
  nn->add_option("--distortion", nn_distortion);
  nn->add_option("--cost", nn_cost);
  add_solver_opts(nn, nn_solver);

  auto* cen = audit->add_subcommand("centroid", "Local centroid optimality audit");
  std::string cen_data, cen_cb;
  int cen_perturbations = 200;
  double cen_radius = 0.1;
  std::uint64_t cen_seed = 0;
  SolverOpts cen_solver;
  cen_solver.exact_limit = default_limit;
  cen->add_option("--data", cen_data)->required();
  cen->add_option("--codebook", cen_cb)->required();
  cen->add_option("--perturbations", cen_perturbations);
  cen->add_option("--radius", cen_radius);
  cen->add_option("--seed", cen_seed);
  add_solver_opts(cen, cen_solver);

  auto* grad = audit->add_subcommand("grad", "Finite-difference gradient audit");
  std::string grad_data;
  int grad_trials = 20;
  double grad_step = 1e-5;
  std::uint64_t grad_seed = 0;
  SolverOpts grad_solver;
  grad_solver.exact_limit = default_limit;
  grad->add_option("--data", grad_data)->required();
  grad->add_option("--trials", grad_trials);
  grad->add_option("--step", grad_step);
  grad->add_option("--seed", grad_seed);
  add_solver_opts(grad, grad_solver);

  // gen --------------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "Sample a synthetic dataset from a plan's generator");
  std::string gen_plan, gen_out;
  std::size_t gen_n = 0;
  std::uint64_t gen_seed = 0;
  gen->add_option("--plan", gen_plan)->required();
  gen->add_option("--n", gen_n, "Sample count")->required();
  gen->add_option("--seed", gen_seed);
  gen->add_option("--out", gen_out)->required();

  // experiment ---------------------------------------------------------------
  auto* exp = app.add_subcommand("experiment", "Consistency trend experiment");
  std::string exp_plan, exp_out, exp_plot;
  bool exp_verify = false;
  exp->add_option("--plan", exp_plan)->required();
  exp->add_option("--out", exp_out, "Write the report table to this file");
  exp->add_option("--plot-data", exp_plot, "Write N-vs-distortion columns to this file");
  exp->add_flag("--verify-exact", exp_verify, "Re-score trained codebooks with the exact solver");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: Usage: " << e.what() << "\n";
    return e.get_exit_code();
  }

  if (*train) {
    if (!train_schedule.empty()) {
      const auto pos = train_schedule.find(':');
      if (pos == std::string::npos) throw gq::ConfigError("schedule must be a:b");
      try {
        cfg.sgg.a = std::stod(train_schedule.substr(0, pos));
        cfg.sgg.b = std::stod(train_schedule.substr(pos + 1));
      } catch (const std::logic_error&) {
        throw gq::ConfigError("schedule must be a:b with numeric a, b");
      }
    }
    cfg.distortion = build_distortion(train_distortion, train_cost);
    train_solver.seed = train_seed;
    cfg.solver = train_solver.build();
    cfg.seed = train_seed;
    if (verbose) {
      cfg.progress = [](int iter, double d) {
        std::cerr << "iter " << iter << " distortion " << sig12(d) << "\n";
      };
    }
    const gq::Dataset ds = gq::load_dataset(train_data);
    const auto data = gq::embed_all(ds, static_cast<Eigen::Index>(train_order));
    const gq::Codebook cb = train_trainer == "kmeans" ? gq::kmeans_fit(data, cfg) : gq::sgg_fit(data, cfg);
    gq::save_codebook(cb, train_out);
    std::cout << "trainer: " << cb.trainer << "\n"
              << "k: " << cb.k() << "\n"
              << "order: " << cb.order() << "\n"
              << "iterations: " << cb.iterations << "\n"
              << "final_distortion: " << sig12(cb.distortion_history.back()) << "\n"
              << "codebook: " << train_out << "\n";
    return 0;
  }

  if (*encode_cmd) {
    enc_solver.seed = enc_seed;
    const gq::Solver solver = enc_solver.build();
    const gq::Distortion dist = build_distortion(enc_distortion, enc_cost);
    const gq::Codebook cb = gq::load_codebook(enc_cb);
    const gq::Dataset ds = gq::load_dataset(enc_data);
    const auto data = gq::embed_all(ds, cb.order());
    std::string lines;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const gq::EncodeResult r = gq::encode(cb, data[i], solver, dist);
      lines += std::to_string(i + 1) + "\t" + std::to_string(r.index + 1) + "\t" + sig12(r.distortion) + "\n";
    }
    std::cout << lines;
    if (!enc_out.empty()) write_text(enc_out, lines);
    return 0;
  }

  if (*eval_cmd) {
    eval_solver.seed = eval_seed;
    const gq::Solver solver = eval_solver.build();
    const gq::Distortion dist = build_distortion(eval_distortion, eval_cost);
    const gq::Codebook cb = gq::load_codebook(eval_cb);
    const gq::Dataset ds = gq::load_dataset(eval_data);
    const auto data = gq::embed_all(ds, cb.order());
    const gq::DistortionReport report = gq::empirical_distortion(cb, data, solver, dist);
    std::cout << "samples: " << report.samples << "\n"
              << "distortion: " << dist.name() << "\n"
              << "mean_distortion: " << sig12(report.mean) << "\n";
    for (std::size_t j = 0; j < report.region_counts.size(); ++j) {
      std::cout << "region " << j + 1 << ": count=" << report.region_counts[j]
                << " mean=" << sig12(report.region_means[j]) << "\n";
    }
    return 0;
  }

  if (*nn) {
    const gq::Solver solver = nn_solver.build();
    const gq::Distortion dist = build_distortion(nn_distortion, nn_cost);
    const gq::Codebook cb = gq::load_codebook(nn_cb);
    const gq::Dataset ds = gq::load_dataset(nn_data);
    const auto data = gq::embed_all(ds, cb.order());
    const gq::NnAuditReport report = gq::audit_nearest_neighbor(cb, data, nn_trials, nn_seed, solver, dist);
    std::cout << "trials: " << report.trials << "\n"
              << "nn_distortion: " << sig12(report.nn_distortion) << "\n"
              << "min_random_distortion: " << sig12(report.min_random_distortion) << "\n"
              << "violations: " << report.violations << "\n";
    return report.violations == 0 ? 0 : 1;
  }

  if (*cen) {
    const gq::Solver solver = cen_solver.build();
    const gq::Codebook cb = gq::load_codebook(cen_cb);
    const gq::Dataset ds = gq::load_dataset(cen_data);
    const auto data = gq::embed_all(ds, cb.order());
    const gq::CentroidAuditReport report =
        gq::audit_centroid(cb, data, cen_perturbations, cen_radius, cen_seed, solver);
    std::cout << "perturbations: " << report.perturbations << "\n"
              << "radius: " << sig12(report.radius) << "\n";
    for (std::size_t j = 0; j < report.regions.size(); ++j) {
      const auto& r = report.regions[j];
      std::cout << "region " << j + 1 << ": count=" << r.count << " mean=" << sig12(r.conditional_mean)
                << " max_improvement=" << sig12(r.max_improvement) << "\n";
    }
    std::cout << "violations: " << report.improving_regions() << "\n";
    return report.improving_regions() == 0 ? 0 : 1;
  }

  if (*grad) {
    const gq::Solver solver = grad_solver.build();
    const gq::Dataset ds = gq::load_dataset(grad_data);
    const auto data = gq::embed_all(ds);
    if (data.size() < 2) throw gq::InsufficientData("gradient audit needs at least two graphs");
    std::mt19937_64 rng(grad_seed);
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    int stable = 0, unstable = 0, violations = 0;
    double max_dev = 0;
    for (int t = 0; t < grad_trials; ++t) {
      const std::size_t a = pick(rng);
      std::size_t b = pick(rng);
      if (b == a) b = (b + 1) % data.size();
      const gq::GraphMatrixd& y = data[a];
      const gq::GraphMatrixd& x = data[b];
      const auto g = gq::grad_distance_sq(y, x, solver);
      gq::FdOptions<double> opts;
      opts.seed = grad_seed + static_cast<std::uint64_t>(t);
      opts.witness_probe = [&](const gq::GraphMatrixd& m) {
        return gq::optimal_kernel(m, x, solver).perm;
      };
      const auto report = gq::fd_check<double>(
          [&](const gq::GraphMatrixd& m) {
            return gq::distance_sq_from_kernel(gq::squared_norm(m),
                                               gq::optimal_kernel(m, x, solver).value,
                                               gq::squared_norm(x));
          },
          y, g, grad_step, opts);
      if (report.directions_checked == 0) {
        ++unstable;
        continue;
      }
      ++stable;
      unstable += report.unstable_alignment ? 1 : 0;
      max_dev = std::max(max_dev, report.max_deviation);
      if (report.max_deviation > 10 * grad_step) ++violations;
    }
    std::cout << "pairs: " << grad_trials << "\n"
              << "stable_points: " << stable << "\n"
              << "unstable_points: " << unstable << "\n"
              << "max_deviation: " << sig12(max_dev) << "\n"
              << "tolerance: " << sig12(10 * grad_step) << "\n"
              << "violations: " << violations << "\n";
    return violations == 0 ? 0 : 1;
  }

  if (*gen) {
    const gq::ExperimentPlan plan = gq::load_plan(gen_plan);
    const auto graphs = gq::generate_mixture(plan.generator, gen_n, gen_seed);
    gq::Dataset ds;
    ds.name = plan.name.empty() ? "mixture" : plan.name;
    ds.attr_dim = plan.generator.prototypes.front().attr_dim();
    ds.undirected = plan.generator.undirected;
    ds.graphs = graphs;
    gq::save_dataset(ds, gen_out);
    std::cout << "graphs: " << graphs.size() << "\n"
              << "out: " << gen_out << "\n";
    return 0;
  }

  if (*exp) {
    const gq::ExperimentPlan plan = gq::load_plan(exp_plan);
    std::optional<gq::Solver> verify;
    if (exp_verify) verify = gq::Solver::exact(std::max(env_exact_limit(), gq::kDefaultExactLimit));
    const gq::ExperimentResult result =
        gq::consistency_experiment(plan, verify ? &*verify : nullptr);

    std::string table = "trainer\tN\tmedian_proxy\tmedian_gap";
    if (result.verified) table += "\texact_median_gap";
    table += "\n";
    for (const auto& trend : result.trends) {
      for (const auto& point : trend.points) {
        table += trend.trainer + "\t" + std::to_string(point.n) + "\t" + sig12(point.median_proxy) +
                 "\t" + sig12(point.median_gap);
        if (result.verified) table += "\t" + sig12(point.exact_median_gap);
        table += "\n";
      }
    }
    std::cout << "heldout: " << result.heldout_size << "\n"
              << "baseline_proxy: " << sig12(result.baseline_proxy) << "\n"
              << table;
    for (const auto& trend : result.trends) {
      std::cout << "trend " << trend.trainer << ": " << (trend.check.ok ? "ok" : "violated")
                << " (inversions=" << trend.check.inversions << ")\n";
      if (result.verified) {
        std::cout << "trend " << trend.trainer << " exact: "
                  << (trend.exact_check.ok ? "ok" : "violated")
                  << " (inversions=" << trend.exact_check.inversions << ")\n";
      }
    }
    if (!exp_out.empty()) write_text(exp_out, table);
    if (!exp_plot.empty()) {
      std::string plot = "N";
      for (const auto& trend : result.trends) plot += "\t" + trend.trainer;
      plot += "\n";
      for (std::size_t ni = 0; ni < plan.sample_sizes.size(); ++ni) {
        plot += std::to_string(plan.sample_sizes[ni]);
        for (const auto& trend : result.trends) plot += "\t" + sig12(trend.points[ni].median_proxy);
        plot += "\n";
      }
      write_text(exp_plot, plot);
    }
    if (!result.all_ok()) {
      std::cerr << "error: TrendViolation: median held-out gap increased beyond tolerance\n";
      return 1;
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const gq::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << "\n";
    return 1;
  }
}
