#include "gq/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gq {

namespace {

using nlohmann::json;

json parse_line(const std::string& line, long lineno) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(lineno, e.what());
  }
}

VectorX<double> parse_attr(const json& arr, Eigen::Index dim, long lineno) {
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != dim) {
    throw DimensionMismatch("line " + std::to_string(lineno) + ": attribute has wrong dimension");
  }
  VectorX<double> v(dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    if (!arr[static_cast<size_t>(c)].is_number()) throw ParseError(lineno, "attribute entry is not a number");
    v(c) = arr[static_cast<size_t>(c)].get<double>();
  }
  return v;
}

json attr_to_json(const VectorX<double>& v) {
  json arr = json::array();
  for (Eigen::Index c = 0; c < v.size(); ++c) arr.push_back(v(c));
  return arr;
}

Graphd parse_graph_record(const json& rec, Eigen::Index dim, bool undirected, long lineno) {
  if (!rec.is_object()) throw ParseError(lineno, "graph record must be an object");
  if (!rec.contains("order") || !rec["order"].is_number_integer()) {
    throw ParseError(lineno, "graph record needs an integer 'order'");
  }
  const int m = rec["order"].get<int>();
  if (m < 1) throw ParseError(lineno, "graph order must be positive");
  if (!rec.contains("vertices") || !rec["vertices"].is_array() ||
      static_cast<int>(rec["vertices"].size()) != m) {
    throw ParseError(lineno, "'vertices' must list exactly 'order' attributes");
  }
  std::vector<VectorX<double>> vattrs;
  vattrs.reserve(static_cast<size_t>(m));
  for (const auto& v : rec["vertices"]) vattrs.push_back(parse_attr(v, dim, lineno));

  Graphd::EdgeMap edges;
  if (rec.contains("edges")) {
    if (!rec["edges"].is_array()) throw ParseError(lineno, "'edges' must be an array");
    for (const auto& e : rec["edges"]) {
      if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
        throw ParseError(lineno, "edge record must be [i, j, attribute]");
      }
      const int i = e[0].get<int>();
      const int j = e[1].get<int>();
      if (i < 1 || i > m || j < 1 || j > m || i == j) {
        throw InvalidEdge("line " + std::to_string(lineno) + ": edge (" + std::to_string(i) + "," +
                          std::to_string(j) + ") out of range 1.." + std::to_string(m));
      }
      if (undirected && i >= j) {
        throw ParseError(lineno, "undirected datasets must store each edge once with i < j");
      }
      VectorX<double> attr = parse_attr(e[2], dim, lineno);
      if (attr.isZero(0.0)) {
        throw InvalidEdge("line " + std::to_string(lineno) + ": zero edge attribute");
      }
      if (!edges.emplace(std::make_pair(i - 1, j - 1), attr).second) {
        throw ParseError(lineno, "duplicate edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
      if (undirected) edges.emplace(std::make_pair(j - 1, i - 1), attr);
    }
  }
  return Graphd(std::move(vattrs), std::move(edges));
}

json graph_to_json(const Graphd& g, bool undirected) {
  json rec;
  rec["order"] = g.order();
  json verts = json::array();
  for (int i = 0; i < g.order(); ++i) verts.push_back(attr_to_json(g.vertex_attr(i)));
  rec["vertices"] = std::move(verts);
  json edges = json::array();
  for (const auto& [pair, attr] : g.edges()) {
    if (undirected && pair.first >= pair.second) continue;  // stored once, i < j
    edges.push_back(json::array({pair.first + 1, pair.second + 1, attr_to_json(attr)}));
  }
  rec["edges"] = std::move(edges);
  return rec;
}

}  // namespace

Dataset read_dataset(std::istream& in) {
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing dataset header");
  ++lineno;
  const json header = parse_line(line, lineno);
  if (!header.is_object() || header.value("format", "") != "gq.dataset") {
    throw ParseError(lineno, "not a gq.dataset header");
  }
  if (header.value("version", 0) != 1) throw ParseError(lineno, "unsupported dataset version");

  Dataset ds;
  ds.name = header.value("name", "");
  if (!header.contains("attr_dim") || !header["attr_dim"].is_number_integer()) {
    throw ParseError(lineno, "header needs integer 'attr_dim'");
  }
  ds.attr_dim = header["attr_dim"].get<Eigen::Index>();
  if (ds.attr_dim < 1) throw ParseError(lineno, "attr_dim must be positive");
  ds.undirected = header.value("undirected", false);
  if (!header.contains("count") || !header["count"].is_number_integer()) {
    throw ParseError(lineno, "header needs integer 'count'");
  }
  const long count = header["count"].get<long>();
  if (count < 0) throw ParseError(lineno, "count must be nonnegative");

  for (long r = 0; r < count; ++r) {
    if (!std::getline(in, line)) throw ParseError(lineno + 1, "unexpected end of file");
    ++lineno;
    ds.graphs.push_back(parse_graph_record(parse_line(line, lineno), ds.attr_dim, ds.undirected, lineno));
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty()) throw ParseError(lineno, "trailing content after the last record");
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file " + path.string());
  return read_dataset(in);
}

void write_dataset(const Dataset& ds, std::ostream& out) {
  for (const auto& g : ds.graphs) {
    if (g.attr_dim() != ds.attr_dim) {
      throw DimensionMismatch("dataset graphs disagree with the declared attribute dimension");
    }
    if (ds.undirected && !g.is_symmetric()) {
      throw ConfigError("undirected dataset contains an asymmetric graph");
    }
  }
  json header;
  header["format"] = "gq.dataset";
  header["version"] = 1;
  header["name"] = ds.name;
  header["attr_dim"] = ds.attr_dim;
  header["undirected"] = ds.undirected;
  header["count"] = ds.graphs.size();
  out << header.dump() << "\n";
  for (const auto& g : ds.graphs) out << graph_to_json(g, ds.undirected).dump() << "\n";
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path.string() + " for writing");
  write_dataset(ds, out);
}

Codebook read_codebook(std::istream& in) {
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing codebook header");
  ++lineno;
  const json header = parse_line(line, lineno);
  if (!header.is_object() || header.value("format", "") != "gq.codebook") {
    throw ParseError(lineno, "not a gq.codebook header");
  }
  if (header.value("version", 0) != 1) throw ParseError(lineno, "unsupported codebook version");

  const Eigen::Index n = header.value("order", Eigen::Index(0));
  const Eigen::Index dim = header.value("attr_dim", Eigen::Index(0));
  const Eigen::Index k = header.value("k", Eigen::Index(0));
  if (n < 1 || dim < 1 || k < 1) throw ParseError(lineno, "codebook header has invalid shape");

  Codebook cb;
  cb.trainer = header.value("trainer", "manual");
  cb.seed = header.value("seed", std::uint64_t(0));
  cb.iterations = header.value("iterations", 0);
  if (header.contains("distortion_history")) {
    for (const auto& v : header["distortion_history"]) cb.distortion_history.push_back(v.get<double>());
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    if (!std::getline(in, line)) throw ParseError(lineno + 1, "unexpected end of file");
    ++lineno;
    const json rec = parse_line(line, lineno);
    if (!rec.is_object() || !rec.contains("cells") || !rec["cells"].is_array() ||
        static_cast<Eigen::Index>(rec["cells"].size()) != n * n) {
      throw ParseError(lineno, "code graph record needs exactly order^2 cells");
    }
    GraphMatrixd y(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index c2 = 0; c2 < n; ++c2) {
        y.set_cell(i, c2, parse_attr(rec["cells"][static_cast<size_t>(i * n + c2)], dim, lineno));
      }
    }
    cb.code_graphs.push_back(std::move(y));
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty()) throw ParseError(lineno, "trailing content after the last code graph");
  }
  return cb;
}

Codebook load_codebook(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open codebook file " + path.string());
  return read_codebook(in);
}

void write_codebook(const Codebook& cb, std::ostream& out) {
  if (cb.code_graphs.empty()) throw InsufficientData("refusing to write an empty codebook");
  for (const auto& y : cb.code_graphs) require_same_shape(cb.code_graphs.front(), y);
  json header;
  header["format"] = "gq.codebook";
  header["version"] = 1;
  header["order"] = cb.order();
  header["attr_dim"] = cb.attr_dim();
  header["k"] = cb.k();
  header["trainer"] = cb.trainer;
  header["seed"] = cb.seed;
  header["iterations"] = cb.iterations;
  header["distortion_history"] = cb.distortion_history;
  out << header.dump() << "\n";
  for (const auto& y : cb.code_graphs) {
    json cells = json::array();
    for (Eigen::Index i = 0; i < y.order(); ++i) {
      for (Eigen::Index j = 0; j < y.order(); ++j) cells.push_back(attr_to_json(y.cell(i, j)));
    }
    json rec;
    rec["cells"] = std::move(cells);
    out << rec.dump() << "\n";
  }
}

void save_codebook(const Codebook& cb, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path.string() + " for writing");
  write_codebook(cb, out);
}

std::vector<GraphMatrixd> embed_all(const Dataset& ds, Eigen::Index order_bound) {
  const Eigen::Index n = order_bound < 0 ? ds.max_order() : order_bound;
  std::vector<GraphMatrixd> out;
  out.reserve(ds.graphs.size());
  for (const auto& g : ds.graphs) out.push_back(embed(g, n));
  return out;
}

}  // namespace gq
