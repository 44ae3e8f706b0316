#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "povspace/ingest.hpp"
#include "povspace/product_space.hpp"
#include "povspace/rca.hpp"

namespace povspace {

/// Per-product poverty index. `ppi[p]` is NaN where `defined[p]` is false
/// (no advantaged producer with poverty data).
struct ProductPovertyVector {
  std::vector<double> ppi;
  std::vector<bool> defined;

  std::size_t size() const { return ppi.size(); }
  /// 1 - PPI, or NaN when undefined.
  double prp(std::size_t p) const;
  /// PRP vector used to build Phi*: undefined products count as PRP = 1.
  std::vector<double> prp_for_eigen() const;
};

/// PPI_p = sum_c M_cp s_cp H_c / sum_c M_cp s_cp over countries that have a
/// headcount. `headcounts[c]` is std::nullopt for poverty-missing countries.
/// Throws if no country has both positive exports and a headcount.
ProductPovertyVector compute_ppi(const Eigen::MatrixXd& exports, const Eigen::MatrixXd& advantage,
                                 const std::vector<std::optional<double>>& headcounts);

ProductPovertyVector compute_ppi(const ExportPanel& panel, const AdvantageMatrix& advantage,
                                 const PovertyPanel& poverty, const IndexMap& countries, const IndexMap& products,
                                 int year);

/// Mean over years skipping undefined entries; undefined only if never defined.
ProductPovertyVector average_ppi(const std::vector<ProductPovertyVector>& yearly);

ProductPovertyVector average_ppi(const ExportPanel& panel, const PovertyPanel& poverty, const IndexMap& countries,
                                 const IndexMap& products, int first_year, int last_year, double tau = 1.0);

/// Phi*_pq = PRP_p * phi_pq.
Eigen::MatrixXd build_phi_star(const Eigen::MatrixXd& phi, std::span<const double> prp);
inline Eigen::MatrixXd build_phi_star(const PhiMatrix& phi, std::span<const double> prp) {
  return build_phi_star(phi.values, prp);
}

struct EigenOptions {
  double tolerance = 1e-12;  // L1 distance between successive iterates
  int max_iterations = 10000;
  double damping = 0.0;      // mixes in (damping / n) * ones; > 0 skips the component restriction
  bool transpose = false;    // use the left eigenvector (Phi* transposed)
};

struct EigenpovertyVector {
  std::vector<double> e_prime;    // >= 0, sums to 1
  std::vector<double> e;          // 1 - e_prime
  std::vector<bool> in_component; // products inside the analysed component
  double eigenvalue = 0.0;        // dominant eigenvalue of Phi*; lambda = 1 / eigenvalue
  int iterations = 0;
  double residual = 0.0;          // || Phi* e' - eigenvalue e' ||_1
};

/// Perron vector of a non-negative matrix by shifted power iteration with L1
/// renormalisation, restricted to the largest weakly connected component of
/// the positive-weight graph unless damping is requested. Products outside
/// the component get e' = 0 (so e = 1).
EigenpovertyVector solve_eigenpoverty(const Eigen::MatrixXd& phi_star, const EigenOptions& options = {});

/// Indices of the largest weakly connected component of the support of `a`
/// (ties broken by the smallest member index), in increasing order.
std::vector<std::size_t> largest_component(const Eigen::MatrixXd& a);

/// Per-product mean of yearly Eigenpoverty values e.
std::vector<double> average_eigenpoverty(const std::vector<EigenpovertyVector>& yearly);

}  // namespace povspace
