#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "povspace/econometrics.hpp"
#include "povspace/poverty_indices.hpp"
#include "povspace/poverty_product.hpp"
#include "povspace/product_space.hpp"

namespace povspace {

std::string_view version();

struct RunConfig {
  std::filesystem::path exports;
  std::filesystem::path poverty;
  std::filesystem::path controls;  // optional
  std::filesystem::path out_dir = "out";

  int first_year = 1995;  // trade window, inclusive
  int last_year = 2010;
  int base_year = 2010;   // RH base (stage-1 dependent)
  int target_year = 2018; // RH target (regression dependent)

  double tau = 1.0;
  double viz_threshold = 0.45;
  EigenOptions eigen;
  bool percent = false;   // poverty headcounts given in percent
  GraphFormat graph_format = GraphFormat::kGraphml;

  // Regression models by name; see kModelNames.
  std::vector<std::string> models;
  bool robust = false;    // HC1 standard errors

  std::vector<int> elbow_windows = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  double elbow_avg_threshold = 0.5;
  double elbow_change_threshold = -0.03;

  // indices step
  std::filesystem::path microdata;
  std::string income_column;
  double poverty_line = 0.0;
  bool weak_poverty_rule = false;

  /// Throws ConfigError on an empty year range, target <= base or bad numeric options.
  /// Input paths are checked by the steps that read them.
  void validate() const;
};

/// "prp_full": RH_target ~ PRP + controls; "prp_only": RH_target ~ PRP;
/// "controls_only": RH_target ~ controls; "resid_only" and "resid_full" are
/// the two-stage residual models without and with controls.
inline constexpr std::string_view kModelNames[] = {"prp_full", "prp_only", "controls_only", "resid_only",
                                                   "resid_full"};

inline constexpr std::string_view kSteps[] = {"rca",     "proximity", "ppi",   "eigenpoverty",
                                              "metrics", "regress",   "elbow", "indices"};

struct StepOutput {
  std::vector<std::string> files;  // relative to out_dir, in write order
  std::vector<std::string> warnings;
};

/// Runs one step, reading the artifacts of earlier steps from `out_dir`.
/// Missing prerequisites raise IoError naming the expected file. Errors are
/// rethrown with the same type and the step name prefixed to the message.
StepOutput run_step(std::string_view step, const RunConfig& config);

/// Every step in order (indices only when microdata is configured), then
/// manifest.json. On failure the manifest is still written with
/// "status": "incomplete" and the error is rethrown.
StepOutput run_pipeline(const RunConfig& config);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace povspace
