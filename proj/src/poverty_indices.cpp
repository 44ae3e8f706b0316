#include "povspace/poverty_indices.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "povspace/csv.hpp"
#include "povspace/error.hpp"

namespace povspace {

IncomeDistribution::IncomeDistribution(std::vector<double> incomes, double poverty_line, PoorRule rule)
    : incomes_(std::move(incomes)), z_(poverty_line), rule_(rule) {
  if (incomes_.empty()) throw ValidationError("income distribution is empty");
  if (!(z_ > 0.0) || !std::isfinite(z_)) throw ValidationError("poverty line must be positive");
  for (double y : incomes_) {
    if (!(y > 0.0) || !std::isfinite(y)) throw ValidationError("incomes must be positive and finite");
  }
}

bool IncomeDistribution::is_poor(double income) const {
  return rule_ == PoorRule::kStrict ? income < z_ : income <= z_;
}

double headcount(const IncomeDistribution& d) {
  const auto poor = std::count_if(d.incomes().begin(), d.incomes().end(), [&](double y) { return d.is_poor(y); });
  return static_cast<double>(poor) / static_cast<double>(d.size());
}

double poverty_gap(const IncomeDistribution& d) {
  double sum = 0.0;
  for (double y : d.incomes()) {
    if (d.is_poor(y)) sum += (d.poverty_line() - y) / d.poverty_line();
  }
  return sum / static_cast<double>(d.size());
}

double fgt(const IncomeDistribution& d, double alpha) {
  if (!(alpha >= 0.0)) throw ComputationError("FGT alpha must be non-negative");
  if (alpha == 0.0) return headcount(d);
  if (alpha == 1.0) return poverty_gap(d);
  double sum = 0.0;
  for (double y : d.incomes()) {
    if (d.is_poor(y)) sum += std::pow((d.poverty_line() - y) / d.poverty_line(), alpha);
  }
  return sum / static_cast<double>(d.size());
}

double watts(const IncomeDistribution& d) {
  double sum = 0.0;
  const double log_z = std::log(d.poverty_line());
  for (double y : d.incomes()) {
    if (d.is_poor(y)) sum += log_z - std::log(y);
  }
  return sum / static_cast<double>(d.size());
}

std::string to_string(AxiomVerdict v) {
  switch (v) {
    case AxiomVerdict::kPass:
      return "pass";
    case AxiomVerdict::kFail:
      return "fail";
    case AxiomVerdict::kNotApplicable:
      return "not applicable";
  }
  return "";
}

const AxiomCheck& AxiomReport::check(const std::string& axiom) const {
  for (const auto& c : checks) {
    if (c.axiom == axiom) return c;
  }
  throw ComputationError("no axiom check named '" + axiom + "'");
}

std::string AxiomReport::to_json() const {
  nlohmann::ordered_json j;
  j["measure"] = measure;
  j["axioms"] = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json a;
    a["axiom"] = c.axiom;
    a["verdict"] = to_string(c.verdict);
    if (c.verdict != AxiomVerdict::kNotApplicable) {
      a["before"] = c.before;
      a["after"] = c.after;
    }
    a["detail"] = c.detail;
    j["axioms"].push_back(a);
  }
  return j.dump(2);
}

namespace {

constexpr double kInvarianceTol = 1e-12;

IncomeDistribution with_incomes(const IncomeDistribution& d, std::vector<double> incomes) {
  return IncomeDistribution(std::move(incomes), d.poverty_line(), d.rule());
}

std::vector<std::size_t> poor_indices(const IncomeDistribution& d) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.is_poor(d.incomes()[i])) out.push_back(i);
  }
  return out;
}

AxiomCheck replication(const PovertyMeasure& m, const IncomeDistribution& d) {
  std::vector<double> copies;
  for (int k = 0; k < 3; ++k) copies.insert(copies.end(), d.incomes().begin(), d.incomes().end());
  AxiomCheck c{"replication", {}, m(d), m(with_incomes(d, copies)), "3-fold replication"};
  c.verdict = std::abs(c.after - c.before) <= kInvarianceTol ? AxiomVerdict::kPass : AxiomVerdict::kFail;
  return c;
}

AxiomCheck focus(const PovertyMeasure& m, const IncomeDistribution& d) {
  const auto& y = d.incomes();
  std::size_t richest = 0;
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (y[i] > y[richest]) richest = i;
  }
  if (d.is_poor(y[richest])) return {"focus", AxiomVerdict::kNotApplicable, 0, 0, "nobody is non-poor"};
  auto raised = y;
  raised[richest] += d.poverty_line();
  AxiomCheck c{"focus", {}, m(d), m(with_incomes(d, raised)), "raised the richest income by z"};
  c.verdict = std::abs(c.after - c.before) <= kInvarianceTol ? AxiomVerdict::kPass : AxiomVerdict::kFail;
  return c;
}

AxiomCheck monotonicity(const PovertyMeasure& m, const IncomeDistribution& d) {
  const auto poor = poor_indices(d);
  if (poor.empty()) return {"monotonicity", AxiomVerdict::kNotApplicable, 0, 0, "nobody is poor"};
  auto lowered = d.incomes();
  const auto poorest = *std::min_element(poor.begin(), poor.end(),
                                         [&](std::size_t a, std::size_t b) { return lowered[a] < lowered[b]; });
  lowered[poorest] *= 0.5;
  AxiomCheck c{"monotonicity", {}, m(d), m(with_incomes(d, lowered)), ""};
  c.verdict = c.after >= c.before ? AxiomVerdict::kPass : AxiomVerdict::kFail;
  c.detail = c.after > c.before ? "halved the poorest income: strict increase"
                                : "halved the poorest income: no change";
  return c;
}

AxiomCheck transfer(const PovertyMeasure& m, const IncomeDistribution& d) {
  const auto poor = poor_indices(d);
  const auto& y = d.incomes();
  if (poor.size() < 2) return {"transfer", AxiomVerdict::kNotApplicable, 0, 0, "needs at least two poor persons"};
  auto [lo, hi] = std::minmax_element(poor.begin(), poor.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
  if (y[*hi] == y[*lo]) return {"transfer", AxiomVerdict::kNotApplicable, 0, 0, "all poor incomes are equal"};
  const double amount = 0.25 * (y[*hi] - y[*lo]);
  auto moved = y;
  moved[*hi] -= amount;
  moved[*lo] += amount;
  AxiomCheck c{"transfer", {}, m(d), m(with_incomes(d, moved)), "progressive transfer among the poor"};
  c.verdict = c.after < c.before ? AxiomVerdict::kPass : AxiomVerdict::kFail;
  return c;
}

AxiomCheck decomposability(const PovertyMeasure& m, const IncomeDistribution& d) {
  if (d.size() < 2) return {"decomposability", AxiomVerdict::kNotApplicable, 0, 0, "needs two subgroups"};
  const auto& y = d.incomes();
  const std::size_t half = y.size() / 2;
  const std::vector<double> a(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(half));
  const std::vector<double> b(y.begin() + static_cast<std::ptrdiff_t>(half), y.end());
  const double n = static_cast<double>(y.size());
  const double combined = (static_cast<double>(a.size()) / n) * m(with_incomes(d, a)) +
                          (static_cast<double>(b.size()) / n) * m(with_incomes(d, b));
  AxiomCheck c{"decomposability", {}, m(d), combined, "two population-weighted halves"};
  c.verdict = std::abs(c.after - c.before) <= kInvarianceTol ? AxiomVerdict::kPass : AxiomVerdict::kFail;
  return c;
}

}  // namespace

AxiomReport axiom_suite(const std::string& name, const PovertyMeasure& measure, const IncomeDistribution& d) {
  AxiomReport r;
  r.measure = name;
  r.checks.push_back(replication(measure, d));
  r.checks.push_back(focus(measure, d));
  r.checks.push_back(monotonicity(measure, d));
  r.checks.push_back(transfer(measure, d));
  r.checks.push_back(decomposability(measure, d));
  return r;
}

std::vector<double> load_incomes(const std::string& path, const std::string& column) {
  const auto table = csv::Table::read(path);
  const std::size_t col = column.empty() ? 0 : table.column(column);
  std::vector<double> out;
  for (const auto& rec : table.records()) {
    if (col >= rec.fields.size()) throw ValidationError(path + ": short row at line " + std::to_string(rec.line));
    auto v = csv::parse_double(rec.fields[col]);
    if (!v) throw ValidationError(path + ": non-numeric income at line " + std::to_string(rec.line));
    out.push_back(*v);
  }
  return out;
}

}  // namespace povspace
