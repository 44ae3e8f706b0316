#include "povspace/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "povspace/country_metrics.hpp"
#include "povspace/csv.hpp"
#include "povspace/error.hpp"
#include "povspace/ingest.hpp"
#include "povspace/rca.hpp"

#ifndef POVSPACE_VERSION
#define POVSPACE_VERSION "0.0.0"
#endif

namespace povspace {

namespace fs = std::filesystem;

std::string_view version() { return POVSPACE_VERSION; }

void RunConfig::validate() const {
  if (first_year > last_year) {
    throw ConfigError("empty trade year range " + std::to_string(first_year) + "-" + std::to_string(last_year));
  }
  if (target_year <= base_year) throw ConfigError("target poverty year must be after the base year");
  if (!std::isfinite(tau) || !(tau > 0.0)) throw ConfigError("tau must be a positive number");
  if (!std::isfinite(viz_threshold)) throw ConfigError("viz threshold must be finite");
  if (!(eigen.tolerance > 0.0)) throw ConfigError("eigen tolerance must be positive");
  if (eigen.max_iterations < 1) throw ConfigError("eigen max iterations must be at least 1");
  if (!(eigen.damping >= 0.0 && eigen.damping < 1.0)) throw ConfigError("damping must lie in [0, 1)");
  for (const auto& m : models) {
    if (std::find(std::begin(kModelNames), std::end(kModelNames), m) == std::end(kModelNames)) {
      throw ConfigError("unknown regression model '" + m + "'");
    }
  }
  for (int w : elbow_windows) {
    if (w < 1) throw ConfigError("elbow windows must be positive");
  }
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw IoError("SHA-256 unavailable");
  }
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Inputs {
  AlignedDataset data;
  std::vector<int> years;
  std::vector<IngestReport> reports;
};

void require_path(const fs::path& p, std::string_view flag) {
  if (p.empty()) throw ConfigError("no " + std::string(flag.substr(2)) + " file given (" + std::string(flag) + ")");
}

Inputs load_inputs(const RunConfig& cfg) {
  require_path(cfg.exports, "--exports");
  require_path(cfg.poverty, "--poverty");
  Inputs in;
  ExportSchema es;
  es.min_year = cfg.first_year;
  es.max_year = cfg.last_year;
  PovertySchema ps;
  ps.percent = cfg.percent;

  IngestReport er, pr, cr;
  const auto exports = load_exports(cfg.exports, es, &er);
  const auto poverty = load_poverty(cfg.poverty, ps, &pr);
  ControlTable controls;
  if (!cfg.controls.empty()) controls = load_controls(cfg.controls, "country", &cr);

  IngestReport ar;
  ar.source = "alignment";
  in.data = align(exports, poverty, controls, JoinMode::kKeepTrade, &ar);
  in.reports = {er, pr};
  if (!cfg.controls.empty()) in.reports.push_back(cr);
  in.reports.push_back(ar);

  for (int y : in.data.exports.years()) in.years.push_back(y);
  if (in.years.empty()) {
    throw ComputationError("no trade data in " + std::to_string(cfg.first_year) + "-" +
                           std::to_string(cfg.last_year));
  }
  return in;
}

std::string year_file(std::string_view stem, int year) {
  return std::string(stem) + "_" + std::to_string(year) + ".csv";
}

class Writer {
 public:
  explicit Writer(const RunConfig& cfg, StepOutput& out) : dir_(cfg.out_dir), out_(out) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    f << content;
    f.close();
    if (!f) throw IoError("write failed for '" + path.string() + "'");
    out_.files.push_back(name);
  }

  void warn(std::string msg) { out_.warnings.push_back(std::move(msg)); }

 private:
  fs::path dir_;
  StepOutput& out_;
};

std::ifstream open_artifact(const RunConfig& cfg, const std::string& name, std::string_view producer) {
  const auto path = cfg.out_dir / name;
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw IoError("missing prerequisite '" + path.string() + "' (run the '" + std::string(producer) +
                  "' step first)");
  }
  return f;
}

Eigen::MatrixXd read_matrix(const RunConfig& cfg, const std::string& name, std::string_view producer,
                            const IndexMap& rows, const IndexMap& cols) {
  auto f = open_artifact(cfg, name, producer);
  try {
    return read_matrix_csv(f, rows, cols);
  } catch (const SchemaError& e) {
    throw SchemaError(name + ": " + e.what());
  }
}

// Keyed per-product table: rows must match `keys` exactly, in order.
std::vector<std::vector<std::string>> read_keyed(const RunConfig& cfg, const std::string& name,
                                                 std::string_view producer, const std::string& key,
                                                 const IndexMap& keys, const std::vector<std::string>& columns) {
  auto f = open_artifact(cfg, name, producer);
  const auto table = csv::Table::parse(f);
  const auto kcol = table.column(key);
  std::vector<std::size_t> cols;
  for (const auto& c : columns) cols.push_back(table.column(c));
  if (table.records().size() != keys.size()) throw SchemaError(name + ": unexpected number of rows");
  std::vector<std::vector<std::string>> out;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& rec = table.records()[i];
    if (rec.fields.size() != table.header().size() || rec.fields[kcol] != keys.code(i)) {
      throw SchemaError(name + ": row " + std::to_string(rec.line) + " does not match '" + keys.code(i) + "'");
    }
    std::vector<std::string> row;
    for (auto c : cols) row.push_back(rec.fields[c]);
    out.push_back(std::move(row));
  }
  return out;
}

double cell_number(const std::string& s) {
  if (csv::is_missing(s)) return kNaN;
  auto v = csv::parse_double(s);
  if (!v) throw SchemaError("non-numeric cell '" + s + "'");
  return *v;
}

std::string num(double v) { return std::isfinite(v) ? csv::format_number(v) : std::string(); }
std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string matrix_csv(const Eigen::MatrixXd& m, const IndexMap& rows, const IndexMap& cols,
                       const std::string& corner) {
  std::ostringstream s;
  write_matrix_csv(s, m, rows, cols, corner);
  return s.str();
}

// ---- steps --------------------------------------------------------------

void step_rca(const RunConfig& cfg, Writer& w) {
  const auto in = load_inputs(cfg);
  const auto& d = in.data;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.countries.size()),
                                              static_cast<Eigen::Index>(d.products.size()));
  for (int y : in.years) {
    const auto rca = compute_rca(d.exports, d.countries, d.products, y);
    const auto adv = threshold_advantage(rca, cfg.tau);
    w.write(year_file("rca", y), matrix_csv(rca.values, d.countries, d.products, "country"));
    w.write(year_file("advantage", y), matrix_csv(adv.values, d.countries, d.products, "country"));
    sum += adv.values;
  }
  const Eigen::MatrixXd avg = sum / static_cast<double>(in.years.size());
  w.write("advantage_avg.csv", matrix_csv(avg, d.countries, d.products, "country"));

  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : in.reports) j.push_back(nlohmann::ordered_json::parse(r.to_json()));
  w.write("ingest_report.json", j.dump(2) + "\n");
  for (const auto& r : in.reports) {
    for (const auto& n : r.notes) w.warn(r.source + ": " + n);
  }
}

void step_proximity(const RunConfig& cfg, Writer& w) {
  const auto in = load_inputs(cfg);
  const auto& d = in.data;
  for (int y : in.years) {
    AdvantageMatrix adv{y, y, read_matrix(cfg, year_file("advantage", y), "rca", d.countries, d.products)};
    const auto prox = compute_proximity(adv);
    const auto phi = normalize_weights(prox);
    w.write(year_file("proximity", y), matrix_csv(prox.values, d.products, d.products, "product"));
    w.write(year_file("phi", y), matrix_csv(phi.values, d.products, d.products, "product"));
  }
}

void step_ppi(const RunConfig& cfg, Writer& w) {
  const auto in = load_inputs(cfg);
  const auto& d = in.data;
  for (int y : in.years) {
    AdvantageMatrix adv{y, y, read_matrix(cfg, year_file("advantage", y), "rca", d.countries, d.products)};
    const auto ppi = compute_ppi(d.exports, adv, d.poverty, d.countries, d.products, y);
    std::ostringstream s;
    csv::write_row(s, {"product_code", "ppi", "prp", "defined_flag"});
    for (std::size_t p = 0; p < ppi.size(); ++p) {
      csv::write_row(s, {d.products.code(p), ppi.defined[p] ? num(ppi.ppi[p]) : "",
                         ppi.defined[p] ? num(ppi.prp(p)) : "", ppi.defined[p] ? "1" : "0"});
      if (!ppi.defined[p]) w.warn(std::to_string(y) + ": PPI undefined for product " + d.products.code(p));
    }
    w.write(year_file("ppi", y), s.str());
  }
}

ProductPovertyVector read_ppi(const RunConfig& cfg, int year, const IndexMap& products) {
  const auto rows = read_keyed(cfg, year_file("ppi", year), "ppi", "product_code", products, {"ppi", "defined_flag"});
  ProductPovertyVector v;
  for (const auto& r : rows) {
    const bool defined = r[1] == "1";
    v.defined.push_back(defined);
    v.ppi.push_back(defined ? cell_number(r[0]) : kNaN);
  }
  return v;
}

EigenpovertyVector read_eigenpoverty(const RunConfig& cfg, int year, const IndexMap& products) {
  const auto rows = read_keyed(cfg, year_file("eigenpoverty", year), "eigenpoverty", "product_code", products,
                               {"eigenpoverty_prime", "eigenpoverty", "component_flag"});
  EigenpovertyVector v;
  for (const auto& r : rows) {
    v.e_prime.push_back(cell_number(r[0]));
    v.e.push_back(cell_number(r[1]));
    v.in_component.push_back(r[2] == "1");
  }
  return v;
}

void step_eigenpoverty(const RunConfig& cfg, Writer& w) {
  const auto in = load_inputs(cfg);
  const auto& d = in.data;
  std::ostringstream summary;
  csv::write_row(summary, {"year", "eigenvalue", "iterations", "component_size"});
  for (int y : in.years) {
    const Eigen::MatrixXd phi = read_matrix(cfg, year_file("phi", y), "proximity", d.products, d.products);
    const auto ppi = read_ppi(cfg, y, d.products);
    const auto prp = ppi.prp_for_eigen();
    const auto ev = solve_eigenpoverty(build_phi_star(phi, prp), cfg.eigen);
    std::ostringstream s;
    csv::write_row(s, {"product_code", "eigenpoverty_prime", "eigenpoverty", "component_flag"});
    for (std::size_t p = 0; p < ev.e.size(); ++p) {
      csv::write_row(s, {d.products.code(p), num(ev.e_prime[p]), num(ev.e[p]), ev.in_component[p] ? "1" : "0"});
    }
    w.write(year_file("eigenpoverty", y), s.str());
    const auto size = std::count(ev.in_component.begin(), ev.in_component.end(), true);
    csv::write_row(summary, {std::to_string(y), num(ev.eigenvalue), std::to_string(ev.iterations),
                             std::to_string(size)});
  }
  w.write("eigen_summary.csv", summary.str());
}

void step_metrics(const RunConfig& cfg, Writer& w) {
  const auto in = load_inputs(cfg);
  const auto& d = in.data;
  const Eigen::MatrixXd adv = read_matrix(cfg, "advantage_avg.csv", "rca", d.countries, d.products);

  std::vector<ProductPovertyVector> ppis;
  std::vector<EigenpovertyVector> eigen;
  std::vector<ProximityMatrix> prox;
  for (int y : in.years) {
    ppis.push_back(read_ppi(cfg, y, d.products));
    eigen.push_back(read_eigenpoverty(cfg, y, d.products));
    prox.push_back({read_matrix(cfg, year_file("proximity", y), "proximity", d.products, d.products)});
  }
  const auto ppi = average_ppi(ppis);
  const auto e = average_eigenpoverty(eigen);
  const std::size_t np = d.products.size();
  std::vector<double> e_prime(np, 0.0);
  std::vector<bool> in_all(np, true);
  for (const auto& ev : eigen) {
    for (std::size_t p = 0; p < np; ++p) {
      e_prime[p] += ev.e_prime[p] / static_cast<double>(eigen.size());
      in_all[p] = in_all[p] && ev.in_component[p];
    }
  }
  const auto shares = trade_shares(d.exports, d.products, in.years.front(), in.years.back());

  std::ostringstream ps;
  csv::write_row(ps, {"product_code", "ppi", "prp", "eigenpoverty", "eigenpoverty_prime", "trade_share",
                      "defined_flag", "component_flag"});
  for (std::size_t p = 0; p < np; ++p) {
    csv::write_row(ps, {d.products.code(p), ppi.defined[p] ? num(ppi.ppi[p]) : "",
                        ppi.defined[p] ? num(ppi.prp(p)) : "", num(e[p]), num(e_prime[p]), num(shares[p]),
                        ppi.defined[p] ? "1" : "0", in_all[p] ? "1" : "0"});
  }
  w.write("product_metrics.csv", ps.str());

  CountryMetricsInput ci;
  ci.countries = &d.countries;
  ci.advantage = &adv;
  ci.ppi = &ppi;
  ci.eigenpoverty = &e;
  ci.poverty = &d.poverty;
  ci.base_year = cfg.base_year;
  ci.target_year = cfg.target_year;
  ci.poverty_missing = d.poverty_missing;
  const auto rows = country_metrics(ci);

  const std::string rh_base = "rh_" + std::to_string(cfg.base_year);
  const std::string rh_target = "rh_" + std::to_string(cfg.target_year);
  std::ostringstream cs;
  csv::write_row(cs, {"country_code", "prp", "eprp", "eprp_raw", rh_base, rh_target, "diversity",
                      "poverty_missing_flag", "no_advantage_flag"});
  for (const auto& r : rows) {
    csv::write_row(cs, {r.country, num(r.prp), num(r.eprp), num(r.eprp_raw), num(r.rh_base), num(r.rh_target),
                        num(r.diversity), r.poverty_missing ? "1" : "0", r.no_advantage() ? "1" : "0"});
    if (r.no_advantage()) w.warn("country " + r.country + " has no advantaged product");
  }
  w.write("country_metrics.csv", cs.str());

  auto graph = filter_graph(average_proximity(prox), d.products, cfg.viz_threshold);
  for (std::size_t p = 0; p < np; ++p) {
    if (ppi.defined[p]) graph.nodes[p].ppi = ppi.ppi[p];
    graph.nodes[p].eigenpoverty = e[p];
    graph.nodes[p].trade_share = shares[p];
  }
  std::ostringstream gs;
  export_graph(gs, graph, cfg.graph_format);
  w.write("product_space." + std::string(extension(cfg.graph_format)), gs.str());
}

std::vector<std::string> chosen_models(const RunConfig& cfg) {
  if (!cfg.models.empty()) return cfg.models;
  return {std::begin(kModelNames), std::end(kModelNames)};
}

void step_regress(const RunConfig& cfg, Writer& w) {
  const auto in = load_inputs(cfg);
  const auto& d = in.data;
  const std::string rh_base = "rh_" + std::to_string(cfg.base_year);
  const std::string rh_target = "rh_" + std::to_string(cfg.target_year);

  auto f = open_artifact(cfg, "country_metrics.csv", "metrics");
  const auto table = csv::Table::parse(f);
  const auto key = table.column("country_code");
  std::vector<std::string> ids;
  for (const auto& r : table.records()) ids.push_back(r.fields.at(key));
  DataTable data(ids);
  for (const std::string name : {"prp", "eprp", rh_base.c_str(), rh_target.c_str()}) {
    const auto col = table.column(name);
    std::vector<double> v;
    for (const auto& r : table.records()) v.push_back(cell_number(r.fields.at(col)));
    data.add_column(name, std::move(v));
  }
  const auto& controls = d.controls.columns();
  for (const auto& c : controls) {
    if (data.has_column(c)) throw ConfigError("control column '" + c + "' clashes with a metric column");
    std::vector<double> v;
    for (const auto& id : ids) v.push_back(d.controls.value(id, c).value_or(kNaN));
    data.add_column(c, std::move(v));
  }

  OlsOptions opt;
  opt.covariance = cfg.robust ? CovarianceType::kHC1 : CovarianceType::kClassical;

  std::vector<NamedModel> table_models;
  std::vector<NamedModel> stage_models;
  std::ostringstream sp;
  csv::write_row(sp, {"model", "dropped", "semi_partial_r2"});
  std::ostringstream resid_csv;
  bool have_resid = false;

  for (const auto& m : chosen_models(cfg)) {
    const bool needs_controls = m == "prp_full" || m == "controls_only" || m == "resid_full";
    if (needs_controls && controls.empty()) {
      w.warn("model " + m + " skipped: no control variables");
      continue;
    }
    if (m == "prp_full" || m == "prp_only" || m == "controls_only") {
      RegressionSpec spec{rh_target, {}, true};
      if (m != "controls_only") spec.regressors.push_back("prp");
      if (m != "prp_only") spec.regressors.insert(spec.regressors.end(), controls.begin(), controls.end());
      auto fit = ols_fit(data, spec, opt);
      for (const auto& dropped : fit.dropped_rows) w.warn("model " + m + ": dropped " + dropped);
      if (m == "prp_full") {
        csv::write_row(sp, {m, "prp", num(semi_partial_r2(data, spec, "prp", opt))});
      }
      table_models.emplace_back(m, std::move(fit));
    } else {
      const std::vector<std::string> ctl = m == "resid_full" ? controls : std::vector<std::string>{};
      auto two = two_stage_residual(data, rh_base, "eprp", rh_target, ctl, opt);
      if (!have_resid) {
        csv::write_row(resid_csv, {"country_code", "resid"});
        for (std::size_t i = 0; i < two.stage2.row_ids.size(); ++i) {
          csv::write_row(resid_csv, {two.stage2.row_ids[i], num(two.residuals[i])});
        }
        have_resid = true;
      }
      stage_models.emplace_back(m + ":stage1", two.stage1);
      table_models.emplace_back(m, std::move(two.stage2));
    }
  }
  if (table_models.empty()) throw ConfigError("no regression model could be run");

  std::vector<NamedModel> all = table_models;
  all.insert(all.end(), stage_models.begin(), stage_models.end());
  std::ostringstream rc;
  write_regression_csv(rc, all);
  w.write("regression.csv", rc.str());
  std::ostringstream rt;
  write_regression_text(rt, table_models, "Dependent variable: " + rh_target);
  w.write("regression.txt", rt.str());
  w.write("semi_partial.csv", sp.str());
  if (have_resid) w.write("stage1_residuals.csv", resid_csv.str());
}

void step_elbow(const RunConfig& cfg, Writer& w) {
  require_path(cfg.poverty, "--poverty");
  PovertySchema ps;
  ps.percent = cfg.percent;
  const auto poverty = load_poverty(cfg.poverty, ps);
  const auto res =
      elbow_analysis(poverty, cfg.elbow_avg_threshold, cfg.elbow_change_threshold, cfg.elbow_windows);
  for (const auto& msg : res.warnings) w.warn(msg);
  std::ostringstream s;
  write_elbow_csv(s, res);
  w.write("elbow.csv", s.str());
}

void step_indices(const RunConfig& cfg, Writer& w) {
  if (cfg.microdata.empty()) throw ConfigError("the indices step needs --microdata");
  if (!(cfg.poverty_line > 0.0)) throw ConfigError("the indices step needs a positive --poverty-line");
  const IncomeDistribution dist(load_incomes(cfg.microdata, cfg.income_column), cfg.poverty_line,
                                cfg.weak_poverty_rule ? PoorRule::kWeak : PoorRule::kStrict);
  const std::vector<std::pair<std::string, PovertyMeasure>> measures = {
      {"headcount", [](const IncomeDistribution& x) { return headcount(x); }},
      {"poverty_gap", [](const IncomeDistribution& x) { return poverty_gap(x); }},
      {"fgt2", [](const IncomeDistribution& x) { return fgt(x, 2.0); }},
      {"watts", [](const IncomeDistribution& x) { return watts(x); }},
  };
  std::ostringstream s;
  csv::write_row(s, {"measure", "value"});
  nlohmann::ordered_json axioms = nlohmann::ordered_json::array();
  for (const auto& [name, m] : measures) {
    csv::write_row(s, {name, num(m(dist))});
    axioms.push_back(nlohmann::ordered_json::parse(axiom_suite(name, m, dist).to_json()));
  }
  w.write("indices.csv", s.str());
  w.write("indices_axioms.json", axioms.dump(2) + "\n");
}

[[noreturn]] void rethrow_in(std::string_view step) {
  const std::string ctx = std::string(step) + ": ";
  try {
    throw;
  } catch (const IoError& e) {
    throw IoError(ctx + e.what());
  } catch (const SchemaError& e) {
    throw SchemaError(ctx + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(ctx + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(ctx + e.what());
  } catch (const ComputationError& e) {
    throw ComputationError(ctx + e.what());
  } catch (const std::exception& e) {
    throw ComputationError(ctx + e.what());
  }
}

nlohmann::ordered_json config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["exports"] = c.exports.string();
  j["poverty"] = c.poverty.string();
  j["controls"] = c.controls.string();
  j["out_dir"] = c.out_dir.string();
  j["years"] = {c.first_year, c.last_year};
  j["base_year"] = c.base_year;
  j["target_year"] = c.target_year;
  j["tau"] = c.tau;
  j["viz_threshold"] = c.viz_threshold;
  j["eigen_tol"] = c.eigen.tolerance;
  j["eigen_max_iter"] = c.eigen.max_iterations;
  j["damping"] = c.eigen.damping;
  j["transpose"] = c.eigen.transpose;
  j["percent"] = c.percent;
  j["format"] = std::string(extension(c.graph_format));
  j["models"] = chosen_models(c);
  j["robust"] = c.robust;
  j["elbow_windows"] = c.elbow_windows;
  j["elbow_avg_threshold"] = c.elbow_avg_threshold;
  j["elbow_change_threshold"] = c.elbow_change_threshold;
  if (!c.microdata.empty()) {
    j["microdata"] = c.microdata.string();
    j["income_column"] = c.income_column;
    j["poverty_line"] = c.poverty_line;
    j["weak_poverty_rule"] = c.weak_poverty_rule;
  }
  return j;
}

}  // namespace

StepOutput run_step(std::string_view step, const RunConfig& config) {
  StepOutput out;
  try {
    config.validate();
    Writer w(config, out);
    if (step == "rca") {
      step_rca(config, w);
    } else if (step == "proximity") {
      step_proximity(config, w);
    } else if (step == "ppi") {
      step_ppi(config, w);
    } else if (step == "eigenpoverty") {
      step_eigenpoverty(config, w);
    } else if (step == "metrics") {
      step_metrics(config, w);
    } else if (step == "regress") {
      step_regress(config, w);
    } else if (step == "elbow") {
      step_elbow(config, w);
    } else if (step == "indices") {
      step_indices(config, w);
    } else {
      throw ConfigError("unknown step '" + std::string(step) + "'");
    }
  } catch (...) {
    rethrow_in(step);
  }
  return out;
}

StepOutput run_pipeline(const RunConfig& config) {
  config.validate();
  StepOutput all;
  std::string failed;
  std::string error;
  std::exception_ptr pending;
  for (auto step : kSteps) {
    if (step == "indices" && config.microdata.empty()) continue;
    try {
      auto r = run_step(step, config);
      all.files.insert(all.files.end(), r.files.begin(), r.files.end());
      all.warnings.insert(all.warnings.end(), r.warnings.begin(), r.warnings.end());
    } catch (const std::exception& e) {
      failed = step;
      error = e.what();
      pending = std::current_exception();
      break;
    }
  }

  // One manifest entry per file.
  std::vector<std::string> files;
  for (const auto& f : all.files) {
    if (std::find(files.begin(), files.end(), f) == files.end()) files.push_back(f);
  }

  nlohmann::ordered_json m;
  m["tool"] = "povspace";
  m["version"] = std::string(version());
  m["status"] = pending ? "incomplete" : "complete";
  if (pending) {
    m["failed_step"] = failed;
    m["error"] = error;
  }
  m["config"] = config_json(config);
  nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
  for (const auto& p : {config.exports, config.poverty, config.controls, config.microdata}) {
    if (p.empty()) continue;
    std::error_code ec;
    const bool exists = fs::exists(p, ec);
    inputs.push_back({{"path", p.string()}, {"sha256", exists ? sha256_file(p) : ""}});
  }
  m["inputs"] = inputs;
  nlohmann::ordered_json outputs = nlohmann::ordered_json::array();
  for (const auto& f : files) outputs.push_back({{"file", f}, {"sha256", sha256_file(config.out_dir / f)}});
  m["outputs"] = outputs;
  m["warnings"] = all.warnings;

  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  std::ofstream mf(config.out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (mf) mf << m.dump(2) << "\n";
  if (pending) std::rethrow_exception(pending);
  if (!mf) throw IoError("cannot write '" + (config.out_dir / "manifest.json").string() + "'");
  all.files = std::move(files);
  all.files.push_back("manifest.json");
  return all;
}

}  // namespace povspace
