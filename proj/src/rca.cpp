#include "povspace/rca.hpp"

#include <istream>
#include <ostream>

#include "povspace/csv.hpp"
#include "povspace/error.hpp"

namespace povspace {

bool AdvantageMatrix::is_binary() const {
  return (values.array() == 0.0 || values.array() == 1.0).all();
}

Eigen::MatrixXd compute_rca(const Eigen::MatrixXd& exports) {
  if ((exports.array() < 0.0).any()) throw ComputationError("export matrix has negative entries");
  const double world = exports.sum();
  if (!(world > 0.0)) throw ComputationError("no positive export value: world trade is zero");
  const Eigen::VectorXd country_total = exports.rowwise().sum();
  const Eigen::RowVectorXd product_total = exports.colwise().sum();

  Eigen::MatrixXd rca = Eigen::MatrixXd::Zero(exports.rows(), exports.cols());
  for (Eigen::Index c = 0; c < exports.rows(); ++c) {
    if (country_total(c) <= 0.0) continue;
    for (Eigen::Index p = 0; p < exports.cols(); ++p) {
      if (product_total(p) <= 0.0) continue;
      rca(c, p) = (exports(c, p) / country_total(c)) / (product_total(p) / world);
    }
  }
  return rca;
}

RcaMatrix compute_rca(const ExportPanel& panel, const IndexMap& countries, const IndexMap& products, int year) {
  if (!panel.has_year(year)) throw ComputationError("year " + std::to_string(year) + " absent from export panel");
  const auto x = panel.matrix(countries, products, year);
  if (!(x.sum() > 0.0)) throw ComputationError("year " + std::to_string(year) + " has no positive export value");
  return RcaMatrix{year, compute_rca(x)};
}

AdvantageMatrix threshold_advantage(const RcaMatrix& rca, double tau) {
  if (!(tau > 0.0)) throw ComputationError("RCA threshold must be positive");
  return AdvantageMatrix{rca.year, rca.year, (rca.values.array() > tau).cast<double>().matrix()};
}

AdvantageMatrix average_advantage(const ExportPanel& panel, const IndexMap& countries, const IndexMap& products,
                                  int first_year, int last_year, double tau, bool majority) {
  if (first_year > last_year) throw ComputationError("empty year range");
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(countries.size()),
                                              static_cast<Eigen::Index>(products.size()));
  for (int y = first_year; y <= last_year; ++y) {
    sum += threshold_advantage(compute_rca(panel, countries, products, y), tau).values;
  }
  Eigen::MatrixXd mean = sum / static_cast<double>(last_year - first_year + 1);
  if (majority) mean = (mean.array() > 0.5).cast<double>().matrix();
  return AdvantageMatrix{first_year, last_year, std::move(mean)};
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m, const IndexMap& rows, const IndexMap& cols,
                      const std::string& corner) {
  std::vector<std::string> fields{corner};
  fields.insert(fields.end(), cols.codes().begin(), cols.codes().end());
  csv::write_row(out, fields);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    fields.assign(1, rows.code(static_cast<std::size_t>(r)));
    for (Eigen::Index c = 0; c < m.cols(); ++c) fields.push_back(csv::format_number(m(r, c)));
    csv::write_row(out, fields);
  }
}

Eigen::MatrixXd read_matrix_csv(std::istream& in, const IndexMap& rows, const IndexMap& cols) {
  const auto table = csv::Table::parse(in);
  if (table.header().size() != cols.size() + 1) throw SchemaError("matrix CSV has wrong number of columns");
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (table.header()[c + 1] != cols.code(c)) {
      throw SchemaError("matrix CSV column " + std::to_string(c + 1) + " is '" + table.header()[c + 1] +
                        "', expected '" + cols.code(c) + "'");
    }
  }
  if (table.records().size() != rows.size()) throw SchemaError("matrix CSV has wrong number of rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& rec = table.records()[r];
    if (rec.fields.size() != cols.size() + 1 || rec.fields[0] != rows.code(r)) {
      throw SchemaError("matrix CSV row at line " + std::to_string(rec.line) + " does not match expected code '" +
                        rows.code(r) + "'");
    }
    for (std::size_t c = 0; c < cols.size(); ++c) {
      auto v = csv::parse_double(rec.fields[c + 1]);
      if (!v) throw ValidationError("non-numeric matrix cell at line " + std::to_string(rec.line));
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *v;
    }
  }
  return m;
}

}  // namespace povspace
