#pragma once

#include <iosfwd>

#include <Eigen/Dense>

#include "povspace/ingest.hpp"

namespace povspace {

/// Balassa index for one year: country rows, product columns.
struct RcaMatrix {
  int year = 0;
  Eigen::MatrixXd values;
};

/// M_cp: binary for a single year, fractional when averaged over years.
struct AdvantageMatrix {
  int first_year = 0;
  int last_year = 0;
  Eigen::MatrixXd values;

  bool is_binary() const;
};

/// RCA of a raw export matrix. Countries with zero total exports and products
/// with zero world exports get all-zero rows/columns.
Eigen::MatrixXd compute_rca(const Eigen::MatrixXd& exports);

/// Throws ComputationError if `year` is absent or the year has no trade.
RcaMatrix compute_rca(const ExportPanel& panel, const IndexMap& countries, const IndexMap& products, int year);

/// M_cp = 1 iff RCA_cp > tau.
AdvantageMatrix threshold_advantage(const RcaMatrix& rca, double tau = 1.0);

/// Entrywise mean of the yearly binary matrices over [first_year, last_year].
/// With `majority` the mean is re-binarised (entry 1 iff mean > 0.5).
AdvantageMatrix average_advantage(const ExportPanel& panel, const IndexMap& countries, const IndexMap& products,
                                  int first_year, int last_year, double tau = 1.0, bool majority = false);

/// Labelled dense matrix dump: first column holds row codes.
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m, const IndexMap& rows, const IndexMap& cols,
                      const std::string& corner = "country");

/// Inverse of write_matrix_csv; row/column codes must match the maps.
Eigen::MatrixXd read_matrix_csv(std::istream& in, const IndexMap& rows, const IndexMap& cols);

}  // namespace povspace
