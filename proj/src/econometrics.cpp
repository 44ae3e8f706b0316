#include "povspace/econometrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "povspace/csv.hpp"
#include "povspace/error.hpp"

namespace povspace {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Pivots below this fraction of the largest one mark a column as aliased.
constexpr double kRankThreshold = 1e-12;
}  // namespace

// ---- DataTable ------------------------------------------------------------

void DataTable::add_column(const std::string& name, std::vector<double> values) {
  if (values.size() != row_ids_.size()) {
    throw SchemaError("column '" + name + "' has " + std::to_string(values.size()) + " values for " +
                      std::to_string(row_ids_.size()) + " rows");
  }
  if (has_column(name)) throw SchemaError("duplicate column '" + name + "'");
  names_.push_back(name);
  columns_.push_back(std::move(values));
}

bool DataTable::has_column(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const std::vector<double>& DataTable::column(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw SchemaError("unknown column '" + std::string(name) + "'");
  return columns_[static_cast<std::size_t>(it - names_.begin())];
}

std::vector<std::size_t> DataTable::complete_rows(const std::vector<std::string>& columns) const {
  std::vector<const std::vector<double>*> cols;
  for (const auto& c : columns) cols.push_back(&column(c));
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < row_ids_.size(); ++r) {
    if (std::all_of(cols.begin(), cols.end(), [r](const auto* c) { return !std::isnan((*c)[r]); })) rows.push_back(r);
  }
  return rows;
}

DataTable DataTable::subset(const std::vector<std::size_t>& rows) const {
  std::vector<std::string> ids;
  for (auto r : rows) ids.push_back(row_ids_.at(r));
  DataTable out(std::move(ids));
  for (std::size_t c = 0; c < names_.size(); ++c) {
    std::vector<double> values;
    for (auto r : rows) values.push_back(columns_[c][r]);
    out.add_column(names_[c], std::move(values));
  }
  return out;
}

void RegressionSpec::validate() const {
  std::set<std::string> seen;
  for (const auto& r : regressors) {
    if (r == dependent) throw ConfigError("dependent variable '" + r + "' listed as a regressor");
    if (!seen.insert(r).second) throw ConfigError("duplicate regressor '" + r + "'");
  }
}

std::optional<std::size_t> RegressionResult::term_index(std::string_view term) const {
  auto it = std::find(terms.begin(), terms.end(), term);
  if (it == terms.end()) return std::nullopt;
  return static_cast<std::size_t>(it - terms.begin());
}

double RegressionResult::coefficient(std::string_view term) const {
  if (auto i = term_index(term)) return coefficients[*i];
  throw ComputationError("term '" + std::string(term) + "' not in model");
}

// ---- OLS ------------------------------------------------------------------

RegressionResult ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& terms,
                         bool has_intercept, const OlsOptions& options) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = x.cols();
  if (static_cast<std::size_t>(k) != terms.size()) throw ComputationError("design/term count mismatch");
  if (y.size() != n) throw ComputationError("design/response length mismatch");
  if (n <= k) {
    throw ComputationError("not enough observations: n = " + std::to_string(n) + " <= k = " + std::to_string(k));
  }
  if (!x.allFinite() || !y.allFinite()) throw ComputationError("design contains non-finite values");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(kRankThreshold);
  const Eigen::Index rank = qr.rank();

  std::vector<Eigen::Index> kept;
  std::vector<std::string> aliased;
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index col = qr.colsPermutation().indices()(i);
    if (i < rank) {
      kept.push_back(col);
    } else {
      aliased.push_back(terms[static_cast<std::size_t>(col)]);
    }
  }
  if (!aliased.empty() && !options.allow_aliased) {
    std::string names;
    for (const auto& a : aliased) names += (names.empty() ? "" : ", ") + a;
    throw ComputationError("rank-deficient design: collinear column(s) " + names);
  }
  std::sort(kept.begin(), kept.end());

  Eigen::MatrixXd xk(n, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) xk.col(static_cast<Eigen::Index>(j)) = x.col(kept[j]);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qrk(xk);
  const Eigen::VectorXd beta_k = qrk.solve(y);

  // (X'X)^-1 = P R^-1 R^-T P'
  const Eigen::Index r = xk.cols();
  const Eigen::MatrixXd rmat = qrk.matrixR().topLeftCorner(r, r).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd rinv =
      rmat.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(r, r));
  const Eigen::MatrixXd unscaled_perm = rinv * rinv.transpose();
  const auto& perm = qrk.colsPermutation();
  const Eigen::MatrixXd xtx_inv = perm * unscaled_perm * perm.transpose();

  RegressionResult out;
  out.terms = terms;
  out.aliased = aliased;
  out.n_observations = static_cast<std::size_t>(n);
  out.df_residual = static_cast<int>(n - k);
  out.df_model = static_cast<int>(has_intercept ? k - 1 : k);

  const Eigen::VectorXd fitted = xk * beta_k;
  const Eigen::VectorXd resid = y - fitted;
  const double rss = resid.squaredNorm();
  const double sigma2 = rss / static_cast<double>(out.df_residual);
  out.residual_std_error = std::sqrt(sigma2);

  Eigen::MatrixXd cov;
  if (options.covariance == CovarianceType::kHC1) {
    const Eigen::MatrixXd meat = xk.transpose() * resid.array().square().matrix().asDiagonal() * xk;
    cov = xtx_inv * meat * xtx_inv * (static_cast<double>(n) / static_cast<double>(n - k));
  } else {
    cov = sigma2 * xtx_inv;
  }

  out.coefficients.assign(static_cast<std::size_t>(k), kNaN);
  out.standard_errors.assign(static_cast<std::size_t>(k), kNaN);
  out.t_values.assign(static_cast<std::size_t>(k), kNaN);
  out.p_values.assign(static_cast<std::size_t>(k), kNaN);
  boost::math::students_t tdist(static_cast<double>(out.df_residual));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const auto dst = static_cast<std::size_t>(kept[j]);
    const auto jj = static_cast<Eigen::Index>(j);
    out.coefficients[dst] = beta_k(jj);
    out.standard_errors[dst] = std::sqrt(cov(jj, jj));
    out.t_values[dst] = beta_k(jj) / out.standard_errors[dst];
    const double t = out.t_values[dst];
    if (std::isfinite(t)) {
      out.p_values[dst] = 2.0 * boost::math::cdf(boost::math::complement(tdist, std::abs(t)));
    } else if (std::isinf(t)) {
      out.p_values[dst] = 0.0;
    }
  }

  const double tss = has_intercept ? (y.array() - y.mean()).square().sum() : y.squaredNorm();
  if (!(tss > 0.0)) throw ComputationError("dependent variable has no variation");
  out.r2 = std::clamp(1.0 - rss / tss, 0.0, 1.0);
  const double n_eff = has_intercept ? static_cast<double>(n - 1) : static_cast<double>(n);
  out.adjusted_r2 = 1.0 - (1.0 - out.r2) * n_eff / static_cast<double>(out.df_residual);
  if (out.df_model > 0) {
    out.f_statistic = ((tss - rss) / out.df_model) / sigma2;
    if (std::isfinite(out.f_statistic) && out.f_statistic >= 0.0) {
      boost::math::fisher_f fdist(out.df_model, out.df_residual);
      out.f_p_value = boost::math::cdf(boost::math::complement(fdist, out.f_statistic));
    } else {
      out.f_p_value = out.f_statistic > 0.0 ? 0.0 : kNaN;
    }
  } else {
    out.f_statistic = kNaN;
    out.f_p_value = kNaN;
  }
  out.residuals.assign(resid.data(), resid.data() + n);
  out.fitted.assign(fitted.data(), fitted.data() + n);
  return out;
}

namespace {

std::vector<std::string> spec_columns(const RegressionSpec& spec) {
  std::vector<std::string> cols{spec.dependent};
  cols.insert(cols.end(), spec.regressors.begin(), spec.regressors.end());
  return cols;
}

RegressionResult fit_rows(const DataTable& data, const RegressionSpec& spec, const std::vector<std::size_t>& rows,
                          const OlsOptions& options) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index offset = spec.include_intercept ? 1 : 0;
  const auto k = static_cast<Eigen::Index>(spec.regressors.size()) + offset;
  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd y(n);
  std::vector<std::string> terms;
  if (spec.include_intercept) {
    x.col(0).setOnes();
    terms.emplace_back(kInterceptName);
  }
  const auto& dep = data.column(spec.dependent);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = dep[rows[static_cast<std::size_t>(i)]];
  for (std::size_t j = 0; j < spec.regressors.size(); ++j) {
    const auto& col = data.column(spec.regressors[j]);
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i, static_cast<Eigen::Index>(j) + offset) = col[rows[static_cast<std::size_t>(i)]];
    }
    terms.push_back(spec.regressors[j]);
  }
  auto out = ols_fit(x, y, terms, spec.include_intercept, options);
  std::vector<bool> used(data.rows(), false);
  for (auto r : rows) {
    out.row_ids.push_back(data.row_ids()[r]);
    used[r] = true;
  }
  for (std::size_t r = 0; r < data.rows(); ++r) {
    if (!used[r]) out.dropped_rows.push_back(data.row_ids()[r]);
  }
  return out;
}

}  // namespace

RegressionResult ols_fit(const DataTable& data, const RegressionSpec& spec, const OlsOptions& options) {
  spec.validate();
  return fit_rows(data, spec, data.complete_rows(spec_columns(spec)), options);
}

double semi_partial_r2(const DataTable& data, const RegressionSpec& full, const std::string& dropped,
                       const OlsOptions& options) {
  full.validate();
  auto it = std::find(full.regressors.begin(), full.regressors.end(), dropped);
  if (it == full.regressors.end()) throw ConfigError("'" + dropped + "' is not a regressor of the full model");
  RegressionSpec reduced = full;
  reduced.regressors.erase(reduced.regressors.begin() + (it - full.regressors.begin()));

  const auto rows = data.complete_rows(spec_columns(full));
  const auto full_fit = fit_rows(data, full, rows, options);
  const auto reduced_fit = fit_rows(data, reduced, rows, options);
  return full_fit.adjusted_r2 - reduced_fit.adjusted_r2;
}

TwoStageResult two_stage_residual(const DataTable& data, const std::string& rh_base, const std::string& eprp,
                                  const std::string& rh_target, const std::vector<std::string>& controls,
                                  const OlsOptions& options) {
  std::vector<std::string> involved{rh_base, eprp, rh_target};
  involved.insert(involved.end(), controls.begin(), controls.end());
  const auto rows = data.complete_rows(involved);

  TwoStageResult out;
  out.stage1 = fit_rows(data, RegressionSpec{rh_base, {eprp}, true}, rows, options);
  out.residuals = out.stage1.residuals;

  DataTable stage2(out.stage1.row_ids);
  stage2.add_column(std::string(kResidualTerm), out.residuals);
  std::vector<double> target;
  for (auto r : rows) target.push_back(data.column(rh_target)[r]);
  stage2.add_column(rh_target, std::move(target));
  for (const auto& c : controls) {
    std::vector<double> values;
    for (auto r : rows) values.push_back(data.column(c)[r]);
    stage2.add_column(c, std::move(values));
  }
  RegressionSpec spec2{rh_target, {std::string(kResidualTerm)}, true};
  spec2.regressors.insert(spec2.regressors.end(), controls.begin(), controls.end());
  out.stage2 = ols_fit(stage2, spec2, options);
  out.stage2.dropped_rows = out.stage1.dropped_rows;
  return out;
}

std::string significance_stars(double p) {
  if (!(p == p)) return "";
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

// ---- table output ---------------------------------------------------------

void write_regression_csv(std::ostream& out, const std::vector<NamedModel>& models) {
  csv::write_row(out, {"model", "term", "estimate", "std_error", "t_value", "p_value", "stars"});
  auto num = [](double v) { return std::isnan(v) ? std::string("NA") : csv::format_number(v); };
  for (const auto& [name, m] : models) {
    for (std::size_t i = 0; i < m.terms.size(); ++i) {
      csv::write_row(out, {name, m.terms[i], num(m.coefficients[i]), num(m.standard_errors[i]), num(m.t_values[i]),
                           num(m.p_values[i]), significance_stars(m.p_values[i])});
    }
    auto stat = [&](const std::string& term, double v) { csv::write_row(out, {name, term, num(v), "", "", "", ""}); };
    stat("n_observations", static_cast<double>(m.n_observations));
    stat("r2", m.r2);
    stat("adjusted_r2", m.adjusted_r2);
    stat("residual_std_error", m.residual_std_error);
    stat("df_residual", m.df_residual);
    csv::write_row(out, {name, "f_statistic", num(m.f_statistic), "", "", num(m.f_p_value),
                         significance_stars(m.f_p_value)});
    stat("df_model", m.df_model);
  }
}

void write_regression_text(std::ostream& out, const std::vector<NamedModel>& models, const std::string& title) {
  std::vector<std::string> terms;
  for (const auto& [_, m] : models) {
    for (const auto& t : m.terms) {
      if (std::find(terms.begin(), terms.end(), t) == terms.end()) terms.push_back(t);
    }
  }
  auto fixed = [](double v, int digits = 3) {
    if (std::isnan(v)) return std::string("NA");
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
  };

  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{""};
  for (std::size_t i = 0; i < models.size(); ++i) header.push_back("(" + models[i].first + ")");
  grid.push_back(header);
  for (const auto& t : terms) {
    std::vector<std::string> coef{t == kInterceptName ? std::string("Constant") : t};
    std::vector<std::string> se{""};
    for (const auto& [_, m] : models) {
      if (auto i = m.term_index(t)) {
        coef.push_back(fixed(m.coefficients[*i]) + significance_stars(m.p_values[*i]));
        se.push_back("(" + fixed(m.standard_errors[*i]) + ")");
      } else {
        coef.emplace_back();
        se.emplace_back();
      }
    }
    grid.push_back(coef);
    grid.push_back(se);
  }
  std::vector<std::string> obs{"Observations"}, r2{"R2"}, adj{"Adjusted R2"}, rse{"Residual Std. Error"},
      f{"F Statistic"};
  for (const auto& [_, m] : models) {
    obs.push_back(std::to_string(m.n_observations));
    r2.push_back(fixed(m.r2));
    adj.push_back(fixed(m.adjusted_r2));
    rse.push_back(fixed(m.residual_std_error) + " (df = " + std::to_string(m.df_residual) + ")");
    f.push_back(fixed(m.f_statistic) + significance_stars(m.f_p_value) + " (df = " + std::to_string(m.df_model) +
                "; " + std::to_string(m.df_residual) + ")");
  }
  const std::size_t rule_at = grid.size();
  for (auto* row : {&obs, &r2, &adj, &rse, &f}) grid.push_back(*row);

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::size_t total = 0;
  for (auto w : width) total += w + 2;
  const std::string rule(total, '-');
  if (!title.empty()) out << title << '\n';
  out << rule << '\n';
  for (std::size_t r = 0; r < grid.size(); ++r) {
    if (r == 1 || r == rule_at) out << rule << '\n';
    for (std::size_t c = 0; c < grid[r].size(); ++c) {
      if (c == 0) {
        out << std::left << std::setw(static_cast<int>(width[c] + 2)) << grid[r][c];
      } else {
        out << std::right << std::setw(static_cast<int>(width[c] + 2)) << grid[r][c];
      }
    }
    out << '\n';
  }
  out << rule << '\n' << "Note: * p<0.1; ** p<0.05; *** p<0.01\n";
}

// ---- elbow ----------------------------------------------------------------

ElbowResult elbow_analysis(const PovertyPanel& poverty, double avg_threshold, double change_threshold,
                           const std::vector<int>& windows) {
  ElbowResult out;
  const auto years = poverty.years();
  if (years.empty()) throw ComputationError("poverty panel is empty");
  const int span = *years.rbegin() - *years.begin();

  std::vector<std::vector<std::pair<int, double>>> series;
  for (const auto& c : poverty.countries()) {
    auto s = poverty.series(c);
    double mean = 0.0;
    for (const auto& [_, h] : s) mean += h;
    mean /= static_cast<double>(s.size());
    if (mean > avg_threshold) {
      out.eligible.push_back(c);
      series.push_back(std::move(s));
    }
  }

  for (int w : windows) {
    if (w <= 0) {
      out.warnings.push_back("window " + std::to_string(w) + " skipped: must be positive");
      continue;
    }
    if (w > span) {
      out.warnings.push_back("window " + std::to_string(w) + " skipped: exceeds panel span of " +
                             std::to_string(span) + " years");
      continue;
    }
    std::size_t count = 0;
    for (const auto& s : series) {
      std::map<int, double> by_year(s.begin(), s.end());
      bool any = false;
      bool all = true;
      for (const auto& [t, h] : by_year) {
        auto base = by_year.find(t - w);
        if (base == by_year.end() || base->second <= 0.0) continue;
        any = true;
        if (!((h - base->second) / base->second > change_threshold)) {
          all = false;
          break;
        }
      }
      if (any && all) ++count;
    }
    out.points.push_back(ElbowPoint{w, count});
  }
  return out;
}

void write_elbow_csv(std::ostream& out, const ElbowResult& result) {
  csv::write_row(out, {"window", "count"});
  for (const auto& p : result.points) csv::write_row(out, {std::to_string(p.window), std::to_string(p.count)});
}

}  // namespace povspace
