#include "gq/generator.hpp"

#include <random>

namespace gq {

void MixtureSpec::validate() const {
  if (prototypes.empty()) throw ConfigError("mixture needs at least one prototype");
  if (weights.size() != prototypes.size()) {
    throw ConfigError("mixture weights must match the prototype count");
  }
  double total = 0;
  for (double w : weights) {
    if (w < 0) throw ConfigError("mixture weights must be nonnegative");
    total += w;
  }
  if (!(total > 0)) throw ConfigError("mixture weights must not all be zero");
  if (sigma < 0) throw ConfigError("noise scale must be nonnegative");
  if (edge_flip < 0 || edge_flip > 1) throw ConfigError("edge flip probability must lie in [0, 1]");
  const Eigen::Index dim = prototypes.front().attr_dim();
  for (const auto& p : prototypes) {
    if (p.attr_dim() != dim) throw DimensionMismatch("prototypes disagree on attribute dimension");
    if (undirected && !p.is_symmetric()) throw ConfigError("undirected mixture has an asymmetric prototype");
  }
}

std::vector<Graphd> generate_mixture(const MixtureSpec& spec, std::size_t count, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  double total_weight = 0;
  for (double w : spec.weights) total_weight += w;

  const Eigen::Index dim = spec.prototypes.front().attr_dim();
  std::vector<Graphd> out;
  out.reserve(count);

  for (std::size_t s = 0; s < count; ++s) {
    // Prototype choice by cumulative weight inversion.
    const double u = unit(rng) * total_weight;
    std::size_t pick = spec.prototypes.size() - 1;
    double acc = 0;
    for (std::size_t i = 0; i < spec.weights.size(); ++i) {
      acc += spec.weights[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    const Graphd& proto = spec.prototypes[pick];
    const int m = proto.order();

    std::vector<VectorX<double>> vattrs;
    vattrs.reserve(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
      VectorX<double> v = proto.vertex_attr(i);
      if (!v.isZero(0.0)) {
        for (Eigen::Index c = 0; c < dim; ++c) v(c) += spec.sigma * gauss(rng);
      }
      vattrs.push_back(std::move(v));
    }

    Graphd::EdgeMap edges;
    auto handle_pair = [&](int i, int j) {
      const bool exists = proto.has_edge(i, j);
      const bool flip = unit(rng) < spec.edge_flip;
      if (flip == exists) return;  // flipped off, or stays absent
      VectorX<double> attr(dim);
      if (exists) {
        attr = proto.edge_attr(i, j);
        for (Eigen::Index c = 0; c < dim; ++c) attr(c) += spec.sigma * gauss(rng);
      } else {
        for (Eigen::Index c = 0; c < dim; ++c) attr(c) = 1.0 + spec.sigma * gauss(rng);
      }
      edges.emplace(std::make_pair(i, j), attr);
      if (spec.undirected) edges.emplace(std::make_pair(j, i), std::move(attr));
    };
    if (spec.undirected) {
      for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) handle_pair(i, j);
      }
    } else {
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          if (i != j) handle_pair(i, j);
        }
      }
    }

    // Random vertex relabeling.
    std::vector<int> relabel(static_cast<size_t>(m));
    std::iota(relabel.begin(), relabel.end(), 0);
    std::shuffle(relabel.begin(), relabel.end(), rng);
    std::vector<VectorX<double>> rv(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) rv[static_cast<size_t>(relabel[static_cast<size_t>(i)])] = vattrs[static_cast<size_t>(i)];
    Graphd::EdgeMap re;
    for (const auto& [pair, attr] : edges) {
      re.emplace(std::make_pair(relabel[static_cast<size_t>(pair.first)],
                                relabel[static_cast<size_t>(pair.second)]),
                 attr);
    }
    out.emplace_back(std::move(rv), std::move(re));
  }
  return out;
}

}  // namespace gq
