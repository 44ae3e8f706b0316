#include "povspace/country_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "povspace/error.hpp"

namespace povspace {

std::vector<double> resc(std::span<const double> x) {
  double min_positive = std::numeric_limits<double>::infinity();
  for (double v : x) {
    if (!(v >= 0.0)) throw ComputationError("resc requires non-negative entries");
    if (v > 0.0) min_positive = std::min(min_positive, v);
  }
  if (!std::isfinite(min_positive)) throw ComputationError("resc undefined: no positive entry");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::log1p(x[i] / min_positive);
  return out;
}

std::vector<std::optional<double>> resc(const std::vector<std::optional<double>>& x) {
  std::vector<double> present;
  for (const auto& v : x) {
    if (v) present.push_back(*v);
  }
  const auto scaled = resc(present);
  std::vector<std::optional<double>> out(x.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i]) out[i] = scaled[k++];
  }
  return out;
}

std::vector<std::optional<double>> country_prp(const Eigen::MatrixXd& advantage, const ProductPovertyVector& ppi) {
  if (static_cast<std::size_t>(advantage.cols()) != ppi.size()) {
    throw ComputationError("advantage matrix and PPI vector differ in product count");
  }
  std::vector<std::optional<double>> out(static_cast<std::size_t>(advantage.rows()));
  for (Eigen::Index c = 0; c < advantage.rows(); ++c) {
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index p = 0; p < advantage.cols(); ++p) {
      const auto i = static_cast<std::size_t>(p);
      if (!ppi.defined[i]) continue;
      num += advantage(c, p) * (1.0 - ppi.ppi[i]);
      den += advantage(c, p);
    }
    if (den > 0.0) out[static_cast<std::size_t>(c)] = num / den;
  }
  return out;
}

std::vector<std::optional<double>> country_eprp_raw(const Eigen::MatrixXd& advantage,
                                                    std::span<const double> eigenpoverty) {
  if (static_cast<std::size_t>(advantage.cols()) != eigenpoverty.size()) {
    throw ComputationError("advantage matrix and Eigenpoverty vector differ in product count");
  }
  std::vector<std::optional<double>> out(static_cast<std::size_t>(advantage.rows()));
  for (Eigen::Index c = 0; c < advantage.rows(); ++c) {
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index p = 0; p < advantage.cols(); ++p) {
      num += advantage(c, p) * (1.0 - eigenpoverty[static_cast<std::size_t>(p)]);
      den += advantage(c, p);
    }
    if (den > 0.0) out[static_cast<std::size_t>(c)] = num / den;
  }
  return out;
}

std::vector<std::optional<double>> country_eprp(const Eigen::MatrixXd& advantage,
                                                std::span<const double> eigenpoverty) {
  return resc(country_eprp_raw(advantage, eigenpoverty));
}

std::vector<std::optional<double>> rescaled_headcount(const PovertyPanel& poverty, int year,
                                                      const IndexMap& countries) {
  std::vector<std::optional<double>> h(countries.size());
  bool any = false;
  for (std::size_t c = 0; c < countries.size(); ++c) {
    h[c] = poverty.headcount(countries.code(c), year);
    any = any || h[c].has_value();
  }
  if (!any) throw ComputationError("no headcount observed in " + std::to_string(year));
  return resc(h);
}

double stagnation(double hc_t, double hc_base) {
  if (!(hc_base > 0.0)) throw ComputationError("percent change undefined: base headcount is zero");
  const double change = (hc_t - hc_base) / hc_base;
  return (1.0 + change) * hc_base;
}

std::vector<CountryMetricsRow> country_metrics(const CountryMetricsInput& in) {
  if (!in.countries || !in.advantage || !in.ppi || !in.eigenpoverty || !in.poverty) {
    throw ComputationError("country metrics input incomplete");
  }
  const auto prp = country_prp(*in.advantage, *in.ppi);
  const auto raw = country_eprp_raw(*in.advantage, *in.eigenpoverty);
  const auto eprp = resc(raw);

  auto base = rescaled_headcount(*in.poverty, in.base_year, *in.countries);
  auto target = rescaled_headcount(*in.poverty, in.target_year, *in.countries);

  std::vector<CountryMetricsRow> rows;
  for (std::size_t c = 0; c < in.countries->size(); ++c) {
    CountryMetricsRow row;
    row.country = in.countries->code(c);
    row.prp = prp[c];
    row.eprp = eprp[c];
    row.eprp_raw = raw[c];
    row.rh_base = base[c];
    row.rh_target = target[c];
    row.diversity = in.advantage->row(static_cast<Eigen::Index>(c)).sum();
    row.poverty_missing = c < in.poverty_missing.size() && in.poverty_missing[c];
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace povspace
