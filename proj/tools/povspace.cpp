// povspace: product-space poverty pipeline driver.

#include <charconv>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "povspace/error.hpp"
#include "povspace/pipeline.hpp"

namespace {

int parse_int(const std::string& s, const std::string& what) {
  int v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw povspace::ConfigError("bad " + what + " '" + s + "'");
  return v;
}

// "2008-2010", "2008:2010" or a single year.
std::pair<int, int> parse_range(const std::string& s, const std::string& what) {
  const auto sep = s.find_first_of("-:", 1);
  if (sep == std::string::npos) {
    const int y = parse_int(s, what);
    return {y, y};
  }
  return {parse_int(s.substr(0, sep), what), parse_int(s.substr(sep + 1), what)};
}

int exit_code_for(const povspace::Error& e) {
  return dynamic_cast<const povspace::ComputationError*>(&e) ? 1 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Product-space poverty analytics: RCA, proximity, PPI, Eigenpoverty, country metrics and OLS."};
  app.set_version_flag("--version", std::string(povspace::version()));
  app.set_config("--config", "", "key = value configuration file; flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  povspace::RunConfig cfg;
  std::string years, format = "graphml", windows;
  std::string exports, poverty, controls, out_dir = cfg.out_dir.string(), microdata;

  app.add_option("--exports", exports, "Long-form trade CSV (country, product, year, value)");
  app.add_option("--poverty", poverty, "Headcount CSV (country, year, headcount)");
  app.add_option("--controls", controls, "Country controls CSV (country, then numeric columns)");
  app.add_option("--years", years, "Trade years, e.g. 1995-2010");
  app.add_option("--base-year", cfg.base_year, "Poverty base year")->capture_default_str();
  app.add_option("--target-year", cfg.target_year, "Poverty target year")->capture_default_str();
  app.add_option("--tau", cfg.tau, "RCA threshold (M = 1 iff RCA > tau)")->capture_default_str();
  app.add_option("--viz-threshold", cfg.viz_threshold, "Proximity cut for the exported graph")
      ->capture_default_str();
  app.add_option("--eigen-tol", cfg.eigen.tolerance, "Power iteration tolerance (L1)")->capture_default_str();
  app.add_option("--eigen-max-iter", cfg.eigen.max_iterations, "Power iteration cap")->capture_default_str();
  app.add_option("--damping", cfg.eigen.damping, "Teleport weight in [0, 1)")->capture_default_str();
  app.add_flag("--transpose", cfg.eigen.transpose, "Use the left Perron vector");
  app.add_option("--out-dir", out_dir, "Artifact directory")->capture_default_str();
  app.add_flag("--percent", cfg.percent, "Headcounts are percentages");
  app.add_option("--format", format, "Graph format: graphml, dot or csv")->capture_default_str();
  app.add_option("--models", cfg.models, "Regression models (comma separated)")->delimiter(',');
  app.add_flag("--robust", cfg.robust, "HC1 standard errors");
  app.add_option("--elbow-windows", windows, "Elbow windows, e.g. 1-12");
  app.add_option("--microdata", microdata, "Income CSV for the indices step");
  app.add_option("--income-column", cfg.income_column, "Income column (default: first)");
  app.add_option("--poverty-line", cfg.poverty_line, "Poverty line z for the indices step");
  app.add_flag("--weak", cfg.weak_poverty_rule, "Count incomes equal to z as poor");

  app.add_subcommand("pipeline", "Run every step and write manifest.json");
  for (auto step : povspace::kSteps) app.add_subcommand(std::string(step), "Run the " + std::string(step) + " step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    cfg.exports = exports;
    cfg.poverty = poverty;
    cfg.controls = controls;
    cfg.out_dir = out_dir;
    cfg.microdata = microdata;
    cfg.graph_format = povspace::parse_graph_format(format);
    if (!years.empty()) std::tie(cfg.first_year, cfg.last_year) = parse_range(years, "--years");
    if (!windows.empty()) {
      auto [lo, hi] = parse_range(windows, "--elbow-windows");
      cfg.elbow_windows.clear();
      for (int w = lo; w <= hi; ++w) cfg.elbow_windows.push_back(w);
    }

    const auto out = cmd == "pipeline" ? povspace::run_pipeline(cfg) : povspace::run_step(cmd, cfg);
    for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
    if (cmd == "indices") {
      std::ifstream f(cfg.out_dir / "indices.csv");
      std::cout << f.rdbuf();
    }
    std::cout << "wrote " << out.files.size() << " file(s) to " << cfg.out_dir.string() << "\n";
    return 0;
  } catch (const povspace::Error& e) {
    std::cerr << "povspace: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "povspace: " << e.what() << "\n";
    return 1;
  }
}
