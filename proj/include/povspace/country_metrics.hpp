#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "povspace/ingest.hpp"
#include "povspace/poverty_product.hpp"

namespace povspace {

/// resc(x)_i = log(1 + x_i / min{x_j > 0}). Order- and zero-preserving.
/// Throws ComputationError if no entry is positive or any entry is negative.
std::vector<double> resc(std::span<const double> x);

/// Applies resc over the defined entries only; undefined entries stay undefined.
std::vector<std::optional<double>> resc(const std::vector<std::optional<double>>& x);

/// Short-run potential: advantage-weighted mean of product PRPs, skipping
/// undefined PPIs. Countries with no weight get std::nullopt.
std::vector<std::optional<double>> country_prp(const Eigen::MatrixXd& advantage, const ProductPovertyVector& ppi);

/// Advantage-weighted mean of (1 - e_p) before rescaling.
std::vector<std::optional<double>> country_eprp_raw(const Eigen::MatrixXd& advantage,
                                                    std::span<const double> eigenpoverty);

/// resc of country_eprp_raw across countries.
std::vector<std::optional<double>> country_eprp(const Eigen::MatrixXd& advantage,
                                                std::span<const double> eigenpoverty);

/// resc across the headcounts observed in `year` for the listed countries;
/// countries without an observation get std::nullopt.
std::vector<std::optional<double>> rescaled_headcount(const PovertyPanel& poverty, int year,
                                                      const IndexMap& countries);

/// (1 + (hc_t - hc_base) / hc_base) * hc_base, which equals hc_t.
double stagnation(double hc_t, double hc_base);

struct CountryMetricsRow {
  std::string country;
  std::optional<double> prp;
  std::optional<double> eprp;
  std::optional<double> eprp_raw;
  std::optional<double> rh_base;
  std::optional<double> rh_target;
  double diversity = 0.0;  // sum_p Mbar_cp: mean number of advantaged products
  bool poverty_missing = false;

  /// True if the row has no advantaged products and is excluded downstream.
  bool no_advantage() const { return !prp.has_value() && !eprp.has_value(); }
};

struct CountryMetricsInput {
  const IndexMap* countries = nullptr;
  const Eigen::MatrixXd* advantage = nullptr;        // averaged M
  const ProductPovertyVector* ppi = nullptr;         // averaged PPI
  const std::vector<double>* eigenpoverty = nullptr; // averaged e
  const PovertyPanel* poverty = nullptr;
  int base_year = 2010;
  int target_year = 2018;
  std::vector<bool> poverty_missing;
};

std::vector<CountryMetricsRow> country_metrics(const CountryMetricsInput& input);

}  // namespace povspace
