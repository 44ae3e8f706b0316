#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace povspace {

/// Dense bijection between opaque string codes and 0..N-1.
class IndexMap {
 public:
  IndexMap() = default;
  /// Builds a map over the sorted, de-duplicated codes.
  explicit IndexMap(std::vector<std::string> codes);

  /// Returns the id of `code`, inserting it at the end if new.
  std::size_t add(const std::string& code);

  std::optional<std::size_t> find(std::string_view code) const;
  std::size_t id(std::string_view code) const;  // throws ValidationError if absent
  const std::string& code(std::size_t id) const { return codes_.at(id); }
  const std::vector<std::string>& codes() const { return codes_; }
  std::size_t size() const { return codes_.size(); }
  bool contains(std::string_view code) const { return find(code).has_value(); }

 private:
  std::vector<std::string> codes_;
  std::unordered_map<std::string, std::size_t> ids_;
};

struct ExportEntry {
  std::string country;
  std::string product;
  int year = 0;
  double value = 0.0;

  friend bool operator==(const ExportEntry&, const ExportEntry&) = default;
};

/// Validated long-form trade panel: one value per (country, product, year).
class ExportPanel {
 public:
  ExportPanel() = default;
  /// Validates non-negativity, key uniqueness and the year range. `lines`
  /// (optional) maps each entry to its source line for error messages.
  ExportPanel(std::vector<ExportEntry> entries, int min_year, int max_year,
              const std::vector<std::size_t>& lines = {});

  const std::vector<ExportEntry>& entries() const { return entries_; }
  int min_year() const { return min_year_; }
  int max_year() const { return max_year_; }
  std::set<int> years() const;
  std::vector<std::string> countries() const;  // sorted
  std::vector<std::string> products() const;   // sorted
  bool has_year(int year) const;

  /// Dense country x product matrix of export values for `year`; entries
  /// whose codes are absent from the maps are ignored.
  Eigen::MatrixXd matrix(const IndexMap& countries, const IndexMap& products, int year) const;

  /// Copy restricted to the given country codes.
  ExportPanel restricted_to(const std::set<std::string>& countries) const;

 private:
  std::vector<ExportEntry> entries_;
  int min_year_ = 0;
  int max_year_ = 0;
};

struct PovertyEntry {
  std::string country;
  int year = 0;
  double headcount = 0.0;

  friend bool operator==(const PovertyEntry&, const PovertyEntry&) = default;
};

/// Headcount ratios in [0, 1], unique per (country, year).
class PovertyPanel {
 public:
  PovertyPanel() = default;
  explicit PovertyPanel(std::vector<PovertyEntry> entries, const std::vector<std::size_t>& lines = {});

  const std::vector<PovertyEntry>& entries() const { return entries_; }
  std::optional<double> headcount(std::string_view country, int year) const;
  std::set<std::string> countries() const;
  std::set<int> years() const;
  /// Observed (year, headcount) series of one country in year order.
  std::vector<std::pair<int, double>> series(std::string_view country) const;

 private:
  std::vector<PovertyEntry> entries_;
  std::map<std::pair<std::string, int>, double, std::less<>> index_;
};

/// Country-keyed numeric columns; missing cells are std::nullopt.
class ControlTable {
 public:
  ControlTable() = default;
  explicit ControlTable(std::vector<std::string> columns);

  void add_row(const std::string& country, std::vector<std::optional<double>> values);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::string>& countries() const { return countries_; }
  std::optional<double> value(std::string_view country, std::string_view column) const;
  bool has_country(std::string_view country) const;
  std::size_t missing_cells() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> countries_;
  std::vector<std::vector<std::optional<double>>> rows_;
};

/// Counters filled while loading; serialised as JSON.
struct IngestReport {
  std::string source;
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
  std::size_t rows_modified = 0;
  std::size_t rows_flagged = 0;
  std::vector<std::string> notes;

  std::string to_json() const;
};

struct ExportSchema {
  std::string country = "country";
  std::string product = "product";
  std::string year = "year";
  std::string value = "value";
  int min_year = 0;     // rows outside [min_year, max_year] are dropped
  int max_year = 9999;
};

struct PovertySchema {
  std::string country = "country";
  std::string year = "year";
  std::string headcount = "headcount";
  bool percent = false;  // divide headcounts by 100
};

ExportPanel load_exports(std::istream& in, const ExportSchema& schema = {}, IngestReport* report = nullptr);
ExportPanel load_exports(const std::filesystem::path& path, const ExportSchema& schema = {},
                         IngestReport* report = nullptr);

PovertyPanel load_poverty(std::istream& in, const PovertySchema& schema = {}, IngestReport* report = nullptr);
PovertyPanel load_poverty(const std::filesystem::path& path, const PovertySchema& schema = {},
                          IngestReport* report = nullptr);

/// Every column other than `country_column` is read as numeric.
ControlTable load_controls(std::istream& in, const std::string& country_column = "country",
                           IngestReport* report = nullptr);
ControlTable load_controls(const std::filesystem::path& path, const std::string& country_column = "country",
                           IngestReport* report = nullptr);

void write_exports(std::ostream& out, const ExportPanel& panel);
void write_poverty(std::ostream& out, const PovertyPanel& panel);

enum class JoinMode {
  kKeepTrade,     // all trade countries kept; those without poverty data flagged
  kIntersection,  // trade panel restricted to countries with poverty data
};

struct AlignedDataset {
  ExportPanel exports;
  PovertyPanel poverty;
  ControlTable controls;
  IndexMap countries;
  IndexMap products;
  std::vector<bool> poverty_missing;  // per country id
  std::vector<std::string> dropped_control_rows;

  std::size_t flagged_count() const;
};

AlignedDataset align(const ExportPanel& exports, const PovertyPanel& poverty, const ControlTable& controls,
                     JoinMode mode = JoinMode::kKeepTrade, IngestReport* report = nullptr);

}  // namespace povspace
