#include "gq/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

namespace gq {

namespace {

using nlohmann::json;

Graphd parse_plan_graph(const json& rec, Eigen::Index dim, bool undirected) {
  if (!rec.is_object() || !rec.contains("order") || !rec.contains("vertices")) {
    throw ParseError("plan prototype must be an object with 'order' and 'vertices'");
  }
  const int m = rec["order"].get<int>();
  std::vector<VectorX<double>> vattrs;
  for (const auto& v : rec["vertices"]) {
    if (static_cast<Eigen::Index>(v.size()) != dim) {
      throw DimensionMismatch("plan prototype attribute has wrong dimension");
    }
    VectorX<double> a(dim);
    for (Eigen::Index c = 0; c < dim; ++c) a(c) = v[static_cast<size_t>(c)].get<double>();
    vattrs.push_back(std::move(a));
  }
  if (static_cast<int>(vattrs.size()) != m) throw ParseError("plan prototype vertex count mismatch");
  Graphd::EdgeMap edges;
  if (rec.contains("edges")) {
    for (const auto& e : rec["edges"]) {
      const int i = e[0].get<int>();
      const int j = e[1].get<int>();
      if (i < 1 || i > m || j < 1 || j > m || i == j) throw InvalidEdge("plan prototype edge out of range");
      VectorX<double> a(dim);
      for (Eigen::Index c = 0; c < dim; ++c) a(c) = e[2][static_cast<size_t>(c)].get<double>();
      edges.emplace(std::make_pair(i - 1, j - 1), a);
      if (undirected) edges.emplace(std::make_pair(j - 1, i - 1), a);
    }
  }
  return Graphd(std::move(vattrs), std::move(edges));
}

TrainerConfig parse_trainer(const json& t) {
  TrainerConfig cfg;
  if (t.contains("k")) cfg.k = t["k"].get<Eigen::Index>();
  if (t.contains("distortion")) {
    const std::string d = t["distortion"].get<std::string>();
    const std::string cost = t.value("cost", "sqeuclid");
    if (d == "sq_metric") cfg.distortion = Distortion::sq_metric();
    else if (d == "metric") cfg.distortion = Distortion::metric();
    else if (d == "edit") cfg.distortion = Distortion::edit(AttributeCostd::parse(cost));
    else throw ConfigError("unknown distortion '" + d + "'");
  }
  if (t.contains("solver")) {
    const std::string s = t["solver"].get<std::string>();
    if (s == "exact") cfg.solver.kind = SolverKind::exact;
    else if (s == "heuristic") cfg.solver.kind = SolverKind::heuristic;
    else throw ConfigError("unknown solver '" + s + "'");
  }
  if (t.contains("exact_limit")) cfg.solver.exact_limit = t["exact_limit"].get<int>();
  if (t.contains("restarts")) cfg.solver.restarts = t["restarts"].get<int>();
  if (t.contains("allow_discontinuous")) cfg.allow_discontinuous = t["allow_discontinuous"].get<bool>();
  if (t.contains("kmeans")) {
    const auto& km = t["kmeans"];
    if (km.contains("max_iters")) cfg.kmeans.max_iters = km["max_iters"].get<int>();
    if (km.contains("rel_tol")) cfg.kmeans.rel_tol = km["rel_tol"].get<double>();
  }
  if (t.contains("sgg")) {
    const auto& sg = t["sgg"];
    if (sg.contains("epochs")) cfg.sgg.epochs = sg["epochs"].get<int>();
    if (sg.contains("a")) cfg.sgg.a = sg["a"].get<double>();
    if (sg.contains("b")) cfg.sgg.b = sg["b"].get<double>();
  }
  return cfg;
}

}  // namespace

void ExperimentPlan::validate() const {
  generator.validate();
  if (sample_sizes.empty()) throw ConfigError("plan needs at least one sample size");
  for (std::size_t i = 0; i + 1 < sample_sizes.size(); ++i) {
    if (sample_sizes[i] >= sample_sizes[i + 1]) {
      throw ConfigError("sample sizes must be strictly increasing");
    }
  }
  if (sample_sizes.front() < 1) throw ConfigError("sample sizes must be positive");
  if (replications < 3) throw ConfigError("plan needs at least 3 replications");
  if (trainers.empty()) throw ConfigError("plan needs at least one trainer");
  for (const auto& t : trainers) {
    if (t != "kmeans" && t != "sgg") throw ConfigError("unknown trainer '" + t + "'");
  }
  trainer.validate();
}

ExperimentPlan read_plan(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("plan: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != "gq.plan") throw ParseError("not a gq.plan document");
  if (doc.value("version", 0) != 1) throw ParseError("unsupported plan version");

  ExperimentPlan plan;
  plan.name = doc.value("name", "");
  const Eigen::Index dim = doc.value("attr_dim", Eigen::Index(0));
  if (dim < 1) throw ParseError("plan needs a positive attr_dim");
  plan.generator.undirected = doc.value("undirected", true);
  if (!doc.contains("prototypes") || !doc["prototypes"].is_array() || doc["prototypes"].empty()) {
    throw ParseError("plan needs a nonempty 'prototypes' array");
  }
  for (const auto& rec : doc["prototypes"]) {
    plan.generator.prototypes.push_back(parse_plan_graph(rec, dim, plan.generator.undirected));
  }
  if (doc.contains("weights")) {
    for (const auto& w : doc["weights"]) plan.generator.weights.push_back(w.get<double>());
  } else {
    plan.generator.weights.assign(plan.generator.prototypes.size(), 1.0);
  }
  plan.generator.sigma = doc.value("sigma", 0.0);
  plan.generator.edge_flip = doc.value("edge_flip", 0.0);
  plan.seed = doc.value("seed", std::uint64_t(0));
  if (!doc.contains("sample_sizes")) throw ParseError("plan needs 'sample_sizes'");
  for (const auto& n : doc["sample_sizes"]) plan.sample_sizes.push_back(n.get<std::size_t>());
  plan.replications = doc.value("replications", 5);
  if (doc.contains("trainers")) {
    plan.trainers.clear();
    for (const auto& t : doc["trainers"]) plan.trainers.push_back(t.get<std::string>());
  }
  if (doc.contains("trainer")) plan.trainer = parse_trainer(doc["trainer"]);
  plan.validate();
  return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open plan file " + path.string());
  return read_plan(in);
}

double median(std::vector<double> values) {
  if (values.empty()) throw InsufficientData("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

TrendCheck check_trend(const std::vector<double>& medians) {
  TrendCheck out;
  double scale = 0;
  for (double m : medians) scale = std::max(scale, std::abs(m));
  for (std::size_t i = 0; i + 1 < medians.size(); ++i) {
    const double excess = medians[i + 1] - medians[i];
    if (excess > 1e-12) {
      ++out.inversions;
      out.worst_excess = std::max(out.worst_excess, scale > 0 ? excess / scale : excess);
    }
  }
  out.ok = out.inversions == 0 || (out.inversions == 1 && out.worst_excess <= 0.05);
  return out;
}

ExperimentResult consistency_experiment(const ExperimentPlan& plan, const Solver* verify) {
  plan.validate();

  const std::size_t max_n = plan.sample_sizes.back();
  ExperimentResult result;
  result.heldout_size = 10 * max_n;
  result.verified = verify != nullptr;

  Eigen::Index order = 0;
  for (const auto& p : plan.generator.prototypes) order = std::max<Eigen::Index>(order, p.order());
  Codebook proto_cb;
  proto_cb.trainer = "prototypes";
  for (const auto& p : plan.generator.prototypes) proto_cb.code_graphs.push_back(embed(p, order));

  for (const auto& trainer : plan.trainers) result.trends.push_back({trainer, {}, {}, {}});
  for (auto& trend : result.trends) {
    trend.points.resize(plan.sample_sizes.size());
    for (std::size_t ni = 0; ni < plan.sample_sizes.size(); ++ni) {
      trend.points[ni].n = plan.sample_sizes[ni];
    }
  }
  std::vector<std::vector<std::vector<double>>> exact_gaps(
      result.trends.size(), std::vector<std::vector<double>>(plan.sample_sizes.size()));
  std::vector<double> baselines;

  for (int rep = 0; rep < plan.replications; ++rep) {
    std::mt19937_64 rep_rng(plan.seed ^ static_cast<std::uint64_t>(rep));
    const std::uint64_t heldout_seed = rep_rng();

    const auto heldout_graphs = generate_mixture(plan.generator, result.heldout_size, heldout_seed);
    std::vector<GraphMatrixd> heldout;
    heldout.reserve(heldout_graphs.size());
    for (const auto& g : heldout_graphs) heldout.push_back(embed(g, order));

    const double baseline =
        empirical_distortion(proto_cb, heldout, plan.trainer.solver, plan.trainer.distortion).mean;
    baselines.push_back(baseline);
    double baseline_verify = 0;
    if (verify) {
      baseline_verify = empirical_distortion(proto_cb, heldout, *verify, plan.trainer.distortion).mean;
    }

    for (std::size_t ni = 0; ni < plan.sample_sizes.size(); ++ni) {
      const std::uint64_t data_seed = rep_rng();
      const std::uint64_t trainer_seed = rep_rng();
      const auto sample_graphs = generate_mixture(plan.generator, plan.sample_sizes[ni], data_seed);
      std::vector<GraphMatrixd> sample;
      sample.reserve(sample_graphs.size());
      for (const auto& g : sample_graphs) sample.push_back(embed(g, order));

      for (std::size_t ti = 0; ti < plan.trainers.size(); ++ti) {
        TrainerConfig cfg = plan.trainer;
        cfg.seed = trainer_seed;
        const Codebook cb = plan.trainers[ti] == "kmeans" ? kmeans_fit(sample, cfg) : sgg_fit(sample, cfg);
        const double proxy = empirical_distortion(cb, heldout, cfg.solver, cfg.distortion).mean;
        auto& point = result.trends[ti].points[ni];
        point.proxy.push_back(proxy);
        point.gap.push_back(proxy - baseline);
        if (verify) {
          const double proxy_exact = empirical_distortion(cb, heldout, *verify, cfg.distortion).mean;
          exact_gaps[ti][ni].push_back(proxy_exact - baseline_verify);
          if (proxy < proxy_exact - 1e-9 * (1.0 + proxy_exact)) {
            throw NumericalError("heuristic held-out distortion undercuts the exact value");
          }
        }
      }
    }
  }

  result.baseline_proxy = median(baselines);
  for (std::size_t ti = 0; ti < result.trends.size(); ++ti) {
    auto& trend = result.trends[ti];
    std::vector<double> gap_medians, exact_medians;
    for (std::size_t ni = 0; ni < trend.points.size(); ++ni) {
      auto& point = trend.points[ni];
      point.median_proxy = median(point.proxy);
      point.median_gap = median(point.gap);
      gap_medians.push_back(point.median_gap);
      if (verify) {
        point.exact_median_gap = median(exact_gaps[ti][ni]);
        exact_medians.push_back(point.exact_median_gap);
      }
    }
    trend.check = check_trend(gap_medians);
    if (verify) trend.exact_check = check_trend(exact_medians);
  }
  return result;
}

}  // namespace gq
