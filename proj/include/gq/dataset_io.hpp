// Flat-file persistence: .gq datasets and .gqc codebooks are line-oriented
// JSON (one header object, one record per line); .gqp experiment plans are a
// single JSON object. Floats are written in shortest round-trip form, so
// save/load is lossless.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gq/graph.hpp"
#include "gq/quantizer.hpp"

namespace gq {

struct Dataset {
  std::string name;
  Eigen::Index attr_dim = 0;
  bool undirected = false;
  std::vector<Graphd> graphs;

  Eigen::Index max_order() const {
    Eigen::Index m = 0;
    for (const auto& g : graphs) m = std::max<Eigen::Index>(m, g.order());
    return m;
  }
};

Dataset read_dataset(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);
void write_dataset(const Dataset& ds, std::ostream& out);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

Codebook read_codebook(std::istream& in);
Codebook load_codebook(const std::filesystem::path& path);
void write_codebook(const Codebook& cb, std::ostream& out);
void save_codebook(const Codebook& cb, const std::filesystem::path& path);

/// Pads every graph of the dataset to a common order (default: the largest
/// order present).
std::vector<GraphMatrixd> embed_all(const Dataset& ds, Eigen::Index order_bound = -1);

}  // namespace gq
