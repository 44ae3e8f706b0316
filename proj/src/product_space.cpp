#include "povspace/product_space.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "povspace/csv.hpp"
#include "povspace/error.hpp"

namespace povspace {

ProximityMatrix compute_proximity(const AdvantageMatrix& advantage) {
  if (!advantage.is_binary()) {
    throw ComputationError("proximity requires a binary advantage matrix (fractional M rejected)");
  }
  const Eigen::MatrixXd& m = advantage.values;
  const Eigen::MatrixXd co = m.transpose() * m;  // co(l, k) = #countries with both l and k
  const Eigen::VectorXd count = co.diagonal();
  const Eigen::Index n = m.cols();

  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index l = 0; l < n; ++l) {
    for (Eigen::Index k = l + 1; k < n; ++k) {
      if (count(l) == 0.0 || count(k) == 0.0) continue;
      // min(co/count_k, co/count_l) == co / max(count_l, count_k)
      const double v = co(l, k) / std::max(count(l), count(k));
      y(l, k) = v;
      y(k, l) = v;
    }
  }
  return ProximityMatrix{std::move(y)};
}

ProximityMatrix average_proximity(const std::vector<ProximityMatrix>& yearly) {
  if (yearly.empty()) throw ComputationError("no proximity matrices to pool");
  Eigen::MatrixXd sum = yearly.front().values;
  for (std::size_t i = 1; i < yearly.size(); ++i) {
    if (yearly[i].values.rows() != sum.rows()) throw ComputationError("proximity matrices differ in size");
    sum += yearly[i].values;
  }
  return ProximityMatrix{sum / static_cast<double>(yearly.size())};
}

PhiMatrix normalize_weights(const ProximityMatrix& proximity) {
  Eigen::MatrixXd phi = proximity.values;
  for (Eigen::Index p = 0; p < phi.rows(); ++p) {
    const double s = phi.row(p).sum();
    if (s > 0.0) {
      phi.row(p) /= s;
    } else {
      phi.row(p).setZero();
    }
  }
  return PhiMatrix{std::move(phi)};
}

ProductSpaceGraph filter_graph(const ProximityMatrix& proximity, const IndexMap& products, double threshold) {
  if (!(threshold >= 0.0)) throw ComputationError("graph threshold must be non-negative");
  const auto& y = proximity.values;
  if (static_cast<std::size_t>(y.rows()) != products.size()) {
    throw ComputationError("proximity matrix does not match the product index");
  }
  ProductSpaceGraph g;
  for (const auto& code : products.codes()) g.nodes.push_back(NodeAttributes{code, {}, {}, {}, {}, {}});
  for (Eigen::Index p = 0; p < y.rows(); ++p) {
    for (Eigen::Index q = p + 1; q < y.cols(); ++q) {
      if (y(p, q) > threshold) g.edges.push_back(Edge{static_cast<std::size_t>(p), static_cast<std::size_t>(q), y(p, q)});
    }
  }
  return g;
}

std::vector<double> trade_shares(const ExportPanel& panel, const IndexMap& products, int first_year, int last_year) {
  std::vector<double> totals(products.size(), 0.0);
  double world = 0.0;
  for (const auto& e : panel.entries()) {
    if (e.year < first_year || e.year > last_year) continue;
    if (auto p = products.find(e.product)) {
      totals[*p] += e.value;
      world += e.value;
    }
  }
  if (world > 0.0) {
    for (auto& t : totals) t /= world;
  }
  return totals;
}

GraphFormat parse_graph_format(std::string_view name) {
  if (name == "graphml") return GraphFormat::kGraphml;
  if (name == "dot") return GraphFormat::kDot;
  if (name == "csv" || name == "edge-csv") return GraphFormat::kEdgeCsv;
  throw ConfigError("unknown graph format '" + std::string(name) + "' (expected graphml, dot or csv)");
}

std::string_view extension(GraphFormat format) {
  switch (format) {
    case GraphFormat::kGraphml:
      return "graphml";
    case GraphFormat::kDot:
      return "dot";
    case GraphFormat::kEdgeCsv:
      return "csv";
  }
  return "";
}

namespace {

struct AttributeValue {
  bool numeric = true;
  double number = 0.0;
  std::string text;
};

std::optional<AttributeValue> attribute(const NodeAttributes& n, std::string_view key) {
  auto num = [](std::optional<double> v) -> std::optional<AttributeValue> {
    if (!v) return std::nullopt;
    return AttributeValue{true, *v, {}};
  };
  if (key == "ppi") return num(n.ppi);
  if (key == "ppi_sqrt") return num(n.ppi ? std::optional<double>(std::sqrt(std::max(0.0, *n.ppi))) : std::nullopt);
  if (key == "eigenpoverty") return num(n.eigenpoverty);
  if (key == "trade_share") return num(n.trade_share);
  if (key == "pci") return num(n.pci);
  if (key == "cluster") {
    if (!n.cluster) return std::nullopt;
    return AttributeValue{false, 0.0, *n.cluster};
  }
  throw ConfigError("unknown node attribute '" + std::string(key) + "'");
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out.push_back('\\');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::string render(const AttributeValue& v) { return v.numeric ? csv::format_number(v.number) : v.text; }

std::vector<std::string> resolve_attributes(const ProductSpaceGraph& g, const std::vector<std::string>& requested) {
  std::vector<std::string> keys;
  if (requested.empty()) {
    for (auto key : kNodeAttributeKeys) {
      const bool everywhere = !g.nodes.empty() && std::all_of(g.nodes.begin(), g.nodes.end(), [&](const auto& n) {
        return attribute(n, key).has_value();
      });
      if (everywhere) keys.emplace_back(key);
    }
    return keys;
  }
  for (const auto& key : requested) {
    for (const auto& n : g.nodes) {
      if (!attribute(n, key)) {
        throw ValidationError("node " + n.code + " lacks requested attribute '" + key + "'");
      }
    }
    keys.push_back(key);
  }
  return keys;
}

void write_graphml(std::ostream& out, const ProductSpaceGraph& g, const std::vector<std::string>& keys) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n";
  for (const auto& key : keys) {
    const bool text = key == "cluster";
    out << "  <key id=\"" << key << "\" for=\"node\" attr.name=\"" << key << "\" attr.type=\""
        << (text ? "string" : "double") << "\"/>\n";
  }
  out << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n";
  out << "  <graph id=\"product_space\" edgedefault=\"undirected\">\n";
  for (const auto& n : g.nodes) {
    out << "    <node id=\"" << xml_escape(n.code) << "\">";
    if (!keys.empty()) out << '\n';
    for (const auto& key : keys) {
      out << "      <data key=\"" << key << "\">" << xml_escape(render(*attribute(n, key))) << "</data>\n";
    }
    out << (keys.empty() ? "" : "    ") << "</node>\n";
  }
  for (const auto& e : g.edges) {
    out << "    <edge source=\"" << xml_escape(g.nodes.at(e.source).code) << "\" target=\""
        << xml_escape(g.nodes.at(e.target).code) << "\">\n"
        << "      <data key=\"weight\">" << csv::format_number(e.weight) << "</data>\n"
        << "    </edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
}

void write_dot(std::ostream& out, const ProductSpaceGraph& g, const std::vector<std::string>& keys) {
  out << "graph product_space {\n";
  for (const auto& n : g.nodes) {
    out << "  " << dot_quote(n.code);
    if (!keys.empty()) {
      out << " [";
      for (std::size_t i = 0; i < keys.size(); ++i) {
        if (i) out << ", ";
        out << keys[i] << '=' << dot_quote(render(*attribute(n, keys[i])));
      }
      out << ']';
    }
    out << ";\n";
  }
  for (const auto& e : g.edges) {
    const auto w = csv::format_number(e.weight);
    out << "  " << dot_quote(g.nodes.at(e.source).code) << " -- " << dot_quote(g.nodes.at(e.target).code)
        << " [weight=" << w << ", label=" << dot_quote(w) << "];\n";
  }
  out << "}\n";
}

void write_edge_csv(std::ostream& out, const ProductSpaceGraph& g) {
  csv::write_row(out, {"source", "target", "weight"});
  for (const auto& e : g.edges) {
    csv::write_row(out, {g.nodes.at(e.source).code, g.nodes.at(e.target).code, csv::format_number(e.weight)});
  }
}

}  // namespace

void export_graph(std::ostream& out, const ProductSpaceGraph& graph, GraphFormat format,
                  const std::vector<std::string>& attributes) {
  for (const auto& e : graph.edges) {
    if (e.source >= graph.nodes.size() || e.target >= graph.nodes.size()) {
      throw ValidationError("edge references an unknown node");
    }
    if (e.source == e.target) throw ValidationError("graph contains a self-loop at " + graph.nodes[e.source].code);
  }
  const auto keys = resolve_attributes(graph, attributes);
  switch (format) {
    case GraphFormat::kGraphml:
      write_graphml(out, graph, keys);
      break;
    case GraphFormat::kDot:
      write_dot(out, graph, keys);
      break;
    case GraphFormat::kEdgeCsv:
      write_edge_csv(out, graph);
      break;
  }
}

}  // namespace povspace
