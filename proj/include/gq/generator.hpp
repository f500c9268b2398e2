// Synthetic dataset generation: seeded mixtures of perturbed prototype
// graphs.
#pragma once

#include <cstdint>
#include <vector>

#include "gq/graph.hpp"

namespace gq {

/// Mixture of prototype graphs. Each sample picks a prototype by weight,
/// jitters every nonzero attribute with Gaussian noise of scale sigma, flips
/// each potential edge with probability edge_flip (new edges receive an
/// attribute of ones jittered the same way), and randomly relabels the
/// vertices.
struct MixtureSpec {
  std::vector<Graphd> prototypes;
  std::vector<double> weights;
  double sigma = 0.0;
  double edge_flip = 0.0;
  bool undirected = true;

  void validate() const;
};

std::vector<Graphd> generate_mixture(const MixtureSpec& spec, std::size_t count, std::uint64_t seed);

}  // namespace gq
