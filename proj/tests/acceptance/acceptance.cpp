// Acceptance suite: one PASS/FAIL/SKIPPED line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "povspace/country_metrics.hpp"
#include "povspace/csv.hpp"
#include "povspace/econometrics.hpp"
#include "povspace/poverty_indices.hpp"
#include "povspace/poverty_product.hpp"
#include "povspace/product_space.hpp"
#include "povspace/rca.hpp"

using namespace povspace;
namespace fs = std::filesystem;

namespace {

enum class Outcome { kPass, kFail, kSkipped };

// Collects the first few failure messages of a criterion.
struct Check {
  std::vector<std::string> failures;
  std::size_t count = 0;

  void expect(bool ok, const std::string& what) {
    ++count;
    if (!ok && failures.size() < 5) failures.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream s;
    s.precision(17);
    s << what << ": got " << got << ", want " << want << " (tol " << tol << ")";
    expect(std::abs(got - want) <= tol, s.str());
  }
};

struct Skip {
  std::string reason;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void criterion(int id, const std::string& name, const std::function<void(Check&)>& body, double time_limit = 0) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  Outcome outcome = Outcome::kPass;
  std::string note;
  try {
    body(c);
  } catch (const Skip& s) {
    outcome = Outcome::kSkipped;
    note = s.reason;
  } catch (const std::exception& e) {
    c.failures.push_back(std::string("exception: ") + e.what());
  }
  const double elapsed = seconds_since(t0);
  if (outcome != Outcome::kSkipped) {
    if (time_limit > 0 && elapsed >= time_limit) {
      c.failures.push_back("runtime " + std::to_string(elapsed) + " s exceeds " + std::to_string(time_limit) + " s");
    }
    outcome = c.failures.empty() ? Outcome::kPass : Outcome::kFail;
  }
  const char* label = outcome == Outcome::kPass ? "PASS" : outcome == Outcome::kFail ? "FAIL" : "SKIPPED";
  std::printf("%-7s [%d] %s (%zu checks, %.3f s)%s%s\n", label, id, name.c_str(), c.count, elapsed,
              note.empty() ? "" : ": ", note.c_str());
  for (const auto& f : c.failures) std::printf("        %s\n", f.c_str());
  if (outcome == Outcome::kFail) ++failures;
}

double max_abs_diff(const Eigen::MatrixXd& a, const oracle::Matrix& b) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) d = std::max(d, std::abs(a(i, j) - b[i][j]));
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + POVSPACE_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// key column -> column name -> cell text
using Sheet = std::map<std::string, std::map<std::string, std::string>>;

Sheet read_sheet(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  const auto t = csv::Table::parse(in);
  Sheet out;
  for (const auto& r : t.records()) {
    auto& row = out[r.fields.at(0)];
    for (std::size_t j = 1; j < t.header().size(); ++j) row[t.header()[j]] = r.fields.at(j);
  }
  return out;
}

// Compares one cell with an expected JSON value; null means an empty cell.
void compare_cell(Check& c, const Sheet& sheet, const std::string& key, const std::string& column,
                  const nlohmann::json& want, const std::string& where) {
  const auto row = sheet.find(key);
  if (row == sheet.end() || !row->second.count(column)) {
    c.expect(false, where + ": missing " + key + "/" + column);
    return;
  }
  const std::string& cell = row->second.at(column);
  if (want.is_null()) {
    c.expect(csv::is_missing(cell), where + ": " + key + "/" + column + " should be empty, got " + cell);
    return;
  }
  const auto got = csv::parse_double(cell);
  if (!got) {
    c.expect(false, where + ": " + key + "/" + column + " not numeric: '" + cell + "'");
    return;
  }
  c.near(*got, want.get<double>(), 1e-9, where + ": " + key + "/" + column);
}

void rca_oracle(Check& c) {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> dim(1, 6);
  for (int trial = 0; trial < 200; ++trial) {
    auto x = oracle::random_exports(rng, dim(rng), dim(rng));
    if (x.sum() == 0.0) x(0, 0) = 1.0;  // zero world trade is rejected, not an RCA input
    const auto r = compute_rca(x);
    const auto ref = oracle::rca(oracle::to_rows(x));
    c.expect(max_abs_diff(r, ref) <= 1e-12, "trial " + std::to_string(trial) + ": RCA differs from the naive sums");
    for (double k : {0.1, 7.0, 1e6}) {
      const Eigen::MatrixXd scaled = compute_rca(k * x);
      c.expect((scaled - r).cwiseAbs().maxCoeff() <= 1e-12,
               "trial " + std::to_string(trial) + ": not scale invariant for k = " + std::to_string(k));
    }
  }
}

void proximity_oracle(Check& c) {
  std::mt19937_64 rng(1002);
  std::uniform_int_distribution<int> dim(1, 8);
  std::uniform_real_distribution<double> dens(0.1, 0.9);
  for (int trial = 0; trial < 200; ++trial) {
    AdvantageMatrix m;
    m.values = oracle::random_binary(rng, dim(rng), dim(rng), dens(rng));
    const auto y = compute_proximity(m).values;
    const auto ref = oracle::proximity(oracle::to_rows(m.values));
    const std::string t = "trial " + std::to_string(trial);
    c.expect(max_abs_diff(y, ref) <= 1e-12, t + ": proximity differs from brute force");
    c.expect(y == y.transpose(), t + ": not exactly symmetric");
    c.expect((y.diagonal().array() == 0.0).all(), t + ": nonzero diagonal");
  }
}

double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

void eigenpoverty_checks(Check& c) {
  std::mt19937_64 rng(1003);
  std::uniform_int_distribution<int> dim(2, 8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = oracle::random_irreducible(rng, dim(rng));
    const auto ref = oracle::perron(a);
    const auto v = solve_eigenpoverty(a);
    const std::string t = "trial " + std::to_string(trial);
    c.expect(l1(v.e_prime, ref) <= 1e-8, t + ": Perron vector differs from the dense solver");
    c.expect(std::all_of(v.e_prime.begin(), v.e_prime.end(), [](double x) { return x >= 0.0; }), t + ": negative entry");
    c.near(std::accumulate(v.e_prime.begin(), v.e_prime.end(), 0.0), 1.0, 1e-12, t + ": sum of e'");
  }

  // uniform PRP on a row-stochastic phi
  for (int n = 2; n <= 8; ++n) {
    auto phi = oracle::random_irreducible(rng, n);
    for (int i = 0; i < n; ++i) phi.row(i) /= phi.row(i).sum();
    const std::vector<double> prp(static_cast<std::size_t>(n), 0.37);
    const auto v = solve_eigenpoverty(build_phi_star(phi, prp));
    for (double x : v.e_prime) c.near(x, 1.0 / n, 1e-10, "uniform case n = " + std::to_string(n));
  }

  Eigen::MatrixXd phi(2, 2);
  phi << 0, 1, 1, 0;
  const std::vector<double> prp{1.0, 0.5};
  const auto v = solve_eigenpoverty(build_phi_star(phi, prp));
  c.near(v.e_prime[0], 0.5858, 1e-4, "two-node e'[0]");
  c.near(v.e_prime[1], 0.4142, 1e-4, "two-node e'[1]");
}

void ppi_convexity(Check& c) {
  std::mt19937_64 rng(1004);
  std::uniform_int_distribution<int> dim(2, 8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int nc = dim(rng), np = dim(rng);
    const auto x = oracle::random_exports(rng, nc, np);
    const auto m = oracle::random_binary(rng, nc, np, 0.5);
    std::vector<std::optional<double>> h(static_cast<std::size_t>(nc));
    for (auto& v : h) v = u(rng) < 0.15 ? std::nullopt : std::optional<double>(u(rng));
    const std::string t = "trial " + std::to_string(trial);
    const auto p = compute_ppi(x, m, h);
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (p.defined[j]) c.expect(p.ppi[j] >= 0.0 && p.ppi[j] <= 1.0, t + ": PPI outside [0, 1]");
    }
    for (double level : {0.0, 0.37, 1.0}) {
      std::vector<std::optional<double>> flat(h.size());
      for (std::size_t i = 0; i < h.size(); ++i) flat[i] = h[i] ? std::optional<double>(level) : std::nullopt;
      const auto q = compute_ppi(x, m, flat);
      for (std::size_t j = 0; j < q.size(); ++j) {
        if (q.defined[j]) c.near(q.ppi[j], level, 1e-12, t + ": constant headcount");
      }
    }
  }
}

std::vector<std::size_t> argsort(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  return idx;
}

void resc_and_stagnation(Check& c) {
  std::mt19937_64 rng(1005);
  std::uniform_int_distribution<int> len(1, 40);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> x(static_cast<std::size_t>(len(rng)));
    for (auto& v : x) v = u(rng) < 0.25 ? 0.0 : std::exp(12.0 * (u(rng) - 0.5));
    x[static_cast<std::size_t>(trial) % x.size()] = 1.0 + u(rng);  // at least one positive entry
    const auto r = resc(x);
    const std::string t = "vector " + std::to_string(trial);
    c.expect(argsort(r) == argsort(x), t + ": order changed");
    for (std::size_t i = 0; i < x.size(); ++i) c.expect((r[i] == 0.0) == (x[i] == 0.0), t + ": zero pattern changed");
  }
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = 1.0 - u(rng);
    c.near(stagnation(a, b), a, 1e-15, "stagnation pair " + std::to_string(i));
  }
}

void ols_oracle(Check& c) {
  std::mt19937_64 rng(1006);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> kdist(2, 10);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = kdist(rng);
    const int n = std::uniform_int_distribution<int>(k + 5, 200)(rng);
    Eigen::MatrixXd x(n, k);
    Eigen::VectorXd y(n);
    const double scale = std::pow(10.0, std::uniform_real_distribution<double>(-2, 3)(rng));
    for (int i = 0; i < n; ++i) {
      x(i, 0) = 1.0;
      for (int j = 1; j < k; ++j) x(i, j) = scale * g(rng);
      y(i) = 0.5 + x.row(i).tail(k - 1).sum() / scale + g(rng);
    }
    std::vector<std::string> terms{"(Intercept)"};
    for (int j = 1; j < k; ++j) terms.push_back("x" + std::to_string(j));
    const auto r = ols_fit(x, y, terms, true);
    const auto ref = oracle::normal_equations(x, y);
    const std::string t = "trial " + std::to_string(trial);
    for (int j = 0; j < k; ++j) {
      const double bs = std::max(1.0, std::abs(ref.beta(j)));
      const double ss = std::max(1.0, std::abs(ref.se(j)));
      c.near(r.coefficients[j] / bs, ref.beta(j) / bs, 1e-8, t + ": coefficient " + terms[j]);
      c.near(r.standard_errors[j] / ss, ref.se(j) / ss, 1e-8, t + ": SE " + terms[j]);
    }
    c.near(r.r2, ref.r2, 1e-8, t + ": R2");
    c.near(r.adjusted_r2, ref.adj_r2, 1e-8, t + ": adjusted R2");
    c.near(r.f_statistic / std::max(1.0, ref.f), ref.f / std::max(1.0, ref.f), 1e-8, t + ": F");

    const Eigen::VectorXd resid = Eigen::Map<const Eigen::VectorXd>(r.residuals.data(), n);
    const double bound = 1e-8 * std::max(1.0, x.cwiseAbs().maxCoeff() * y.cwiseAbs().maxCoeff() * n);
    c.expect((x.transpose() * resid).cwiseAbs().maxCoeff() < bound, t + ": residuals not orthogonal to X");
  }

  // an all-zero regressor adds nothing but costs one residual degree of freedom
  const std::size_t n = 50;
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = "r" + std::to_string(i);
  DataTable d(ids);
  std::vector<double> a(n), b(n), zero(n, 0.0), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = g(rng);
    b[i] = g(rng);
    y[i] = a[i] - 0.5 * b[i] + g(rng);
  }
  d.add_column("a", a);
  d.add_column("b", b);
  d.add_column("zero", zero);
  d.add_column("y", y);
  OlsOptions lenient;
  lenient.allow_aliased = true;
  const auto reduced = ols_fit(d, RegressionSpec{"y", {"a", "b"}, true});
  const double dn = static_cast<double>(n), k = 4.0;
  const double df_shift = -(1.0 - reduced.r2) * (dn - 1.0) * (1.0 / (dn - k) - 1.0 / (dn - k + 1.0));
  c.near(semi_partial_r2(d, RegressionSpec{"y", {"a", "b", "zero"}, true}, "zero", lenient), df_shift, 1e-12,
         "semi-partial R2 of an all-zero column");
}

void index_suite(Check& c) {
  const IncomeDistribution d({1, 3}, 2);
  c.near(headcount(d), 0.5, 1e-12, "P0");
  c.near(poverty_gap(d), 0.25, 1e-12, "P1");
  c.near(fgt(d, 2), 0.125, 1e-12, "P2");
  c.near(watts(d), std::log(2.0) / 2.0, 1e-12, "Watts");

  std::mt19937_64 rng(1007);
  std::lognormal_distribution<double> inc(1.0, 0.8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> y(static_cast<std::size_t>(1 + trial % 50));
    for (auto& v : y) v = inc(rng);
    const IncomeDistribution s(y, 3.0);
    c.expect(fgt(s, 0) == headcount(s), "fgt(.,0) != headcount");
    c.expect(fgt(s, 1) == poverty_gap(s), "fgt(.,1) != poverty_gap");
  }

  const IncomeDistribution four({1, 2, 3, 5}, 4);
  const std::vector<std::pair<std::string, std::pair<PovertyMeasure, AxiomVerdict>>> expected = {
      {"headcount", {[](const IncomeDistribution& x) { return headcount(x); }, AxiomVerdict::kFail}},
      {"poverty_gap", {[](const IncomeDistribution& x) { return poverty_gap(x); }, AxiomVerdict::kFail}},
      {"fgt2", {[](const IncomeDistribution& x) { return fgt(x, 2); }, AxiomVerdict::kPass}},
      {"watts", {[](const IncomeDistribution& x) { return watts(x); }, AxiomVerdict::kPass}},
  };
  for (const auto& [name, spec] : expected) {
    const auto report = axiom_suite(name, spec.first, four);
    const auto verdict = report.check("transfer").verdict;
    c.expect(verdict == spec.second, name + ": transfer verdict " + to_string(verdict));
  }

  std::uniform_int_distribution<int> groups(2, 6);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> y(static_cast<std::size_t>(5 + trial % 60));
    for (auto& v : y) v = inc(rng);
    const int g = groups(rng);
    std::vector<std::vector<double>> parts(static_cast<std::size_t>(g));
    std::uniform_int_distribution<int> pick(0, g - 1);
    for (double v : y) parts[static_cast<std::size_t>(pick(rng))].push_back(v);
    for (const auto& [name, spec] : expected) {
      double total = 0.0;
      for (const auto& p : parts) {
        if (p.empty()) continue;
        total += static_cast<double>(p.size()) / static_cast<double>(y.size()) * spec.first(IncomeDistribution(p, 3.0));
      }
      c.near(total, spec.first(IncomeDistribution(y, 3.0)), 1e-12, name + ": decomposability");
    }
  }
}

void end_to_end(Check& c) {
  const fs::path fixture = fs::path(POVSPACE_FIXTURES) / "e2e";
  const auto expected = nlohmann::json::parse(slurp(fixture / "expected.json"));
  const fs::path work = fs::temp_directory_path() / "povspace_acceptance_e2e";
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string inputs = "--exports \"" + (fixture / "exports.csv").string() + "\" --poverty \"" +
                             (fixture / "poverty.csv").string() + "\" --controls \"" +
                             (fixture / "controls.csv").string() + "\" --years 2008-2010 --base-year 2010 " +
                             "--target-year 2018";
  const auto a = work / "a", b = work / "b";
  c.expect(run_cli("pipeline " + inputs + " --out-dir \"" + a.string() + "\"", work / "log_a") == 0,
           "first run failed: " + slurp(work / "log_a"));
  c.expect(run_cli("pipeline " + inputs + " --out-dir \"" + b.string() + "\"", work / "log_b") == 0,
           "second run failed: " + slurp(work / "log_b"));

  const auto products = expected["products"].get<std::vector<std::string>>();
  const auto countries = expected["countries"].get<std::vector<std::string>>();

  const auto pm = read_sheet(a / "product_metrics.csv");
  for (std::size_t j = 0; j < products.size(); ++j) {
    compare_cell(c, pm, products[j], "ppi", expected["ppi_avg"][j], "product_metrics");
    compare_cell(c, pm, products[j], "eigenpoverty", expected["eigenpoverty_avg"][j], "product_metrics");
  }
  const auto cm = read_sheet(a / "country_metrics.csv");
  const std::vector<std::pair<std::string, std::string>> country_columns = {
      {"prp", "prp_c"}, {"eprp", "eprp"}, {"eprp_raw", "eprp_raw"},
      {"diversity", "diversity"}, {"rh_2010", "rh_2010"}, {"rh_2018", "rh_2018"}};
  for (std::size_t i = 0; i < countries.size(); ++i) {
    for (const auto& [column, key] : country_columns) {
      compare_cell(c, cm, countries[i], column, expected[key][i], "country_metrics");
    }
  }
  for (const auto& [year, per] : expected["per_year"].items()) {
    const auto ppi = read_sheet(a / ("ppi_" + year + ".csv"));
    const auto eig = read_sheet(a / ("eigenpoverty_" + year + ".csv"));
    for (std::size_t j = 0; j < products.size(); ++j) {
      compare_cell(c, ppi, products[j], "ppi", per["ppi"][j], "ppi_" + year);
      compare_cell(c, eig, products[j], "eigenpoverty_prime", per["eigenpoverty_prime"][j], "eigenpoverty_" + year);
      compare_cell(c, eig, products[j], "eigenpoverty", per["eigenpoverty"][j], "eigenpoverty_" + year);
    }
  }

  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    if (name == "manifest.json") continue;  // records the output directory
    c.expect(slurp(entry.path()) == slurp(b / name), "rerun differs in " + name.string());
    ++compared;
  }
  c.expect(compared >= 20, "too few artifacts written: " + std::to_string(compared));
  fs::remove_all(work);
}

// Full-data run; the directory holds exports.csv, poverty.csv and controls.csv.
void reproduction(Check& c) {
  const char* dir = std::getenv("POVSPACE_REPRO_DIR");
  if (!dir || !*dir) throw Skip{"set POVSPACE_REPRO_DIR to the full trade and poverty extracts"};
  const fs::path data(dir);
  for (const char* f : {"exports.csv", "poverty.csv", "controls.csv"}) {
    if (!fs::exists(data / f)) throw Skip{(data / f).string() + " not found"};
  }
  const fs::path out = fs::temp_directory_path() / "povspace_acceptance_repro";
  fs::remove_all(out);
  const char* extra = std::getenv("POVSPACE_REPRO_ARGS");
  const std::string args = "pipeline --exports \"" + (data / "exports.csv").string() + "\" --poverty \"" +
                           (data / "poverty.csv").string() + "\" --controls \"" +
                           (data / "controls.csv").string() + "\" --out-dir \"" + out.string() + "\" " +
                           (extra ? extra : "");
  const fs::path log = fs::temp_directory_path() / "povspace_acceptance_repro.log";
  const int code = run_cli(args, log);
  c.expect(code == 0, "pipeline exited with " + std::to_string(code) + ": " + slurp(log));
  if (code != 0) return;

  const auto ppi = read_sheet(out / "ppi_2010.csv");
  std::string top;
  double best = -1.0;
  for (const auto& [code_, row] : ppi) {
    const auto v = csv::parse_double(row.at("ppi"));
    if (v && *v > best) best = *v, top = code_;
  }
  c.expect(top == "2605", "top PPI product in 2010 is " + top + ", expected 2605 (cobalt ore)");
  c.near(best, 0.830, 0.02, "top PPI in 2010");

  std::ifstream in(out / "regression.csv");
  const auto t = csv::Table::parse(in);
  std::map<std::pair<std::string, std::string>, double> est;
  for (const auto& r : t.records()) {
    if (const auto v = csv::parse_double(r.fields.at(2))) est[{r.fields.at(0), r.fields.at(1)}] = *v;
  }
  auto get = [&](const std::string& model, const std::string& term) {
    const auto it = est.find({model, term});
    if (it == est.end()) throw std::runtime_error("regression.csv lacks " + model + "/" + term);
    return it->second;
  };
  c.near(get("prp_full", "prp"), -27.892, 0.15 * 27.892, "model 1 PRP coefficient");
  c.near(get("prp_full", "r2"), 0.681, 0.05, "model 1 R2");
  c.near(get("resid_only", "resid"), -0.925, 0.15 * 0.925, "stage-2 residual coefficient");
  fs::remove_all(out);
}

}  // namespace

int main() {
  criterion(1, "RCA matches the naive oracle and is scale invariant", rca_oracle, 1.0);
  criterion(2, "proximity matches brute force, symmetric, zero diagonal", proximity_oracle, 1.0);
  criterion(3, "eigenpoverty matches the dense eigensolver and analytic cases", eigenpoverty_checks, 2.0);
  criterion(4, "PPI is convex in the headcounts", ppi_convexity);
  criterion(5, "resc preserves order and zeros; stagnation identity", resc_and_stagnation);
  criterion(6, "OLS matches the normal equations reference", ols_oracle, 2.0);
  criterion(7, "poverty index values, identities, axioms and decomposability", index_suite);
  criterion(8, "end-to-end fixture reproduces expected values; reruns byte-identical", end_to_end, 1.0);
  criterion(9, "reproduction mode on the full data", reproduction);
  std::printf("%s\n", failures == 0 ? "acceptance: all criteria passed" : "acceptance: some criteria failed");
  return failures == 0 ? 0 : 1;
}
