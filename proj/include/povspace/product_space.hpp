#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "povspace/ingest.hpp"
#include "povspace/rca.hpp"

namespace povspace {

/// Symmetric product x product co-export proximity with a zero diagonal.
struct ProximityMatrix {
  Eigen::MatrixXd values;
};

/// Row-normalised proximity; isolated products have all-zero rows.
struct PhiMatrix {
  Eigen::MatrixXd values;
};

/// y_lm = min(P(l | m), P(m | l)) estimated by co-specialisation frequencies
/// across countries. Requires a binary advantage matrix.
ProximityMatrix compute_proximity(const AdvantageMatrix& advantage);

/// Entrywise mean of several yearly proximity matrices (pooled estimate).
ProximityMatrix average_proximity(const std::vector<ProximityMatrix>& yearly);

PhiMatrix normalize_weights(const ProximityMatrix& proximity);

struct NodeAttributes {
  std::string code;
  std::optional<double> ppi;
  std::optional<double> eigenpoverty;
  std::optional<double> trade_share;
  std::optional<double> pci;
  std::optional<std::string> cluster;
};

struct Edge {
  std::size_t source = 0;
  std::size_t target = 0;
  double weight = 0.0;
};

/// Undirected weighted product graph; each edge stored once with source < target.
struct ProductSpaceGraph {
  std::vector<NodeAttributes> nodes;
  std::vector<Edge> edges;
};

/// Keeps every product as a node and the pairs with y_lm > threshold as edges.
ProductSpaceGraph filter_graph(const ProximityMatrix& proximity, const IndexMap& products, double threshold = 0.45);

/// Share of each product in world exports, summed over [first_year, last_year].
std::vector<double> trade_shares(const ExportPanel& panel, const IndexMap& products, int first_year, int last_year);

enum class GraphFormat { kGraphml, kDot, kEdgeCsv };

/// Accepts "graphml", "dot", "csv" / "edge-csv"; throws ConfigError otherwise.
GraphFormat parse_graph_format(std::string_view name);
std::string_view extension(GraphFormat format);

/// Node attribute keys understood by the exporter. "ppi_sqrt" is derived from "ppi".
inline constexpr std::string_view kNodeAttributeKeys[] = {"ppi", "ppi_sqrt", "eigenpoverty", "trade_share", "pci",
                                                          "cluster"};

/// Writes the graph. With an empty `attributes` list every attribute present on
/// all nodes is emitted; otherwise each requested attribute must exist on every
/// node or ValidationError is thrown.
void export_graph(std::ostream& out, const ProductSpaceGraph& graph, GraphFormat format,
                  const std::vector<std::string>& attributes = {});

}  // namespace povspace
