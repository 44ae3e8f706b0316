#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "povspace/ingest.hpp"

namespace povspace {

/// Named numeric columns over labelled rows. NaN marks a missing cell.
class DataTable {
 public:
  DataTable() = default;
  explicit DataTable(std::vector<std::string> row_ids) : row_ids_(std::move(row_ids)) {}

  void add_column(const std::string& name, std::vector<double> values);
  bool has_column(std::string_view name) const;
  const std::vector<double>& column(std::string_view name) const;
  const std::vector<std::string>& column_names() const { return names_; }
  const std::vector<std::string>& row_ids() const { return row_ids_; }
  std::size_t rows() const { return row_ids_.size(); }

  /// Rows with a value in every listed column.
  std::vector<std::size_t> complete_rows(const std::vector<std::string>& columns) const;
  DataTable subset(const std::vector<std::size_t>& rows) const;

 private:
  std::vector<std::string> row_ids_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
};

struct RegressionSpec {
  std::string dependent;
  std::vector<std::string> regressors;
  bool include_intercept = true;

  /// Throws ConfigError on duplicate regressors or dependent-as-regressor.
  void validate() const;
};

enum class CovarianceType { kClassical, kHC1 };

struct OlsOptions {
  CovarianceType covariance = CovarianceType::kClassical;
  /// When false a rank-deficient design is an error. When true, aliased
  /// columns get NaN estimates and the degrees of freedom still count them.
  bool allow_aliased = false;
};

inline constexpr std::string_view kInterceptName = "(Intercept)";

struct RegressionResult {
  std::vector<std::string> terms;  // intercept first when present
  std::vector<double> coefficients;
  std::vector<double> standard_errors;
  std::vector<double> t_values;
  std::vector<double> p_values;
  std::vector<std::string> aliased;

  double r2 = 0.0;
  double adjusted_r2 = 0.0;
  double f_statistic = 0.0;
  double f_p_value = 0.0;
  int df_model = 0;
  int df_residual = 0;
  double residual_std_error = 0.0;
  std::size_t n_observations = 0;

  std::vector<double> residuals;
  std::vector<double> fitted;
  std::vector<std::string> row_ids;      // rows used, in order
  std::vector<std::string> dropped_rows; // removed by listwise deletion

  std::optional<std::size_t> term_index(std::string_view term) const;
  double coefficient(std::string_view term) const;
};

/// OLS on an explicit design. `x` must already contain the intercept column
/// if one is wanted; `terms` names the columns of `x`.
RegressionResult ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& terms,
                         bool has_intercept, const OlsOptions& options = {});

/// OLS after listwise deletion of rows missing any column used by `spec`.
RegressionResult ols_fit(const DataTable& data, const RegressionSpec& spec, const OlsOptions& options = {});

/// adjusted R^2 (full) - adjusted R^2 (full without `dropped`), both fitted on
/// the complete cases of the full model.
double semi_partial_r2(const DataTable& data, const RegressionSpec& full, const std::string& dropped,
                       const OlsOptions& options = {});

struct TwoStageResult {
  RegressionResult stage1;
  RegressionResult stage2;
  std::vector<double> residuals;  // stage-1 residuals per row of stage2.row_ids
};

inline constexpr std::string_view kResidualTerm = "resid";

/// Stage 1: base ~ eprp. Stage 2: target ~ resid + controls. Both stages use
/// the complete cases over every involved column.
TwoStageResult two_stage_residual(const DataTable& data, const std::string& rh_base, const std::string& eprp,
                                  const std::string& rh_target, const std::vector<std::string>& controls,
                                  const OlsOptions& options = {});

/// "***" for p < 0.01, "**" for p < 0.05, "*" for p < 0.1.
std::string significance_stars(double p_value);

using NamedModel = std::pair<std::string, RegressionResult>;

/// Long-format CSV: model, term, estimate, std_error, t_value, p_value, stars,
/// then one row per fit statistic.
void write_regression_csv(std::ostream& out, const std::vector<NamedModel>& models);

/// Side-by-side text table: coefficients with stars, SEs in parentheses below,
/// then observations, R^2, adjusted R^2, residual std. error and F.
void write_regression_text(std::ostream& out, const std::vector<NamedModel>& models, const std::string& title = "");

struct ElbowPoint {
  int window = 0;
  std::size_t count = 0;
};

struct ElbowResult {
  std::vector<std::string> eligible;  // mean headcount above the threshold
  std::vector<ElbowPoint> points;
  std::vector<std::string> warnings;
};

/// Among countries whose mean headcount exceeds `avg_threshold`, counts per
/// window w those whose headcount change over every observed (t - w, t) pair
/// exceeds `change_threshold`. Countries without any such pair are not counted.
ElbowResult elbow_analysis(const PovertyPanel& poverty, double avg_threshold, double change_threshold,
                           const std::vector<int>& windows);

void write_elbow_csv(std::ostream& out, const ElbowResult& result);

}  // namespace povspace
