#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace povspace {

enum class PoorRule {
  kStrict,  // poor iff y < z
  kWeak,    // poor iff y <= z
};

/// Positive welfare values and a positive poverty line.
class IncomeDistribution {
 public:
  /// Throws ValidationError on an empty vector, a non-positive income or z <= 0.
  IncomeDistribution(std::vector<double> incomes, double poverty_line, PoorRule rule = PoorRule::kStrict);

  const std::vector<double>& incomes() const { return incomes_; }
  double poverty_line() const { return z_; }
  PoorRule rule() const { return rule_; }
  std::size_t size() const { return incomes_.size(); }
  bool is_poor(double income) const;

 private:
  std::vector<double> incomes_;
  double z_;
  PoorRule rule_;
};

/// Share of the population below the line (P0).
double headcount(const IncomeDistribution& d);
/// Mean normalised shortfall (z - y) / z over the poor, divided by N (P1).
double poverty_gap(const IncomeDistribution& d);
/// Foster-Greer-Thorbecke P_alpha. fgt(d, 0) == headcount, fgt(d, 1) == poverty_gap.
double fgt(const IncomeDistribution& d, double alpha);
/// Mean of ln z - ln y over the poor, divided by N.
double watts(const IncomeDistribution& d);

using PovertyMeasure = std::function<double(const IncomeDistribution&)>;

enum class AxiomVerdict { kPass, kFail, kNotApplicable };

struct AxiomCheck {
  std::string axiom;
  AxiomVerdict verdict = AxiomVerdict::kNotApplicable;
  double before = 0.0;
  double after = 0.0;
  std::string detail;
};

struct AxiomReport {
  std::string measure;
  std::vector<AxiomCheck> checks;  // replication, focus, monotonicity, transfer, decomposability

  const AxiomCheck& check(const std::string& axiom) const;
  std::string to_json() const;
};

/// Empirical checks of the five axioms by perturbing `d`:
///  - replication: 3-fold population copy leaves the index unchanged (1e-12);
///  - focus: raising the richest non-poor income leaves it unchanged;
///  - monotonicity: halving the poorest income does not lower it;
///  - transfer: moving a quarter of the gap from the richest to the poorest
///    poor person strictly lowers it;
///  - decomposability: population-weighted halves reproduce the total (1e-12).
AxiomReport axiom_suite(const std::string& name, const PovertyMeasure& measure, const IncomeDistribution& d);

std::string to_string(AxiomVerdict v);

/// One income per row in `column` (default: the first column).
std::vector<double> load_incomes(const std::string& path, const std::string& column = "");

}  // namespace povspace
