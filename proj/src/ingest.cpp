#include "povspace/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <fstream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "povspace/csv.hpp"
#include "povspace/error.hpp"

namespace povspace {
namespace {

std::string at_line(const std::vector<std::size_t>& lines, std::size_t i) {
  if (i < lines.size()) return " (line " + std::to_string(lines[i]) + ")";
  return " (entry " + std::to_string(i) + ")";
}

void drop(IngestReport* report, std::size_t line, const std::string& why) {
  if (!report) return;
  ++report->rows_dropped;
  report->notes.push_back("line " + std::to_string(line) + ": dropped, " + why);
}

template <class F>
auto with_path(const std::filesystem::path& path, F&& f) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return f(in);
  } catch (const IoError&) {
    throw;
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace

// ---- IndexMap -------------------------------------------------------------

IndexMap::IndexMap(std::vector<std::string> codes) {
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
  for (auto& c : codes) add(c);
}

std::size_t IndexMap::add(const std::string& code) {
  if (auto it = ids_.find(code); it != ids_.end()) return it->second;
  const std::size_t id = codes_.size();
  codes_.push_back(code);
  ids_.emplace(code, id);
  return id;
}

std::optional<std::size_t> IndexMap::find(std::string_view code) const {
  auto it = ids_.find(std::string(code));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::size_t IndexMap::id(std::string_view code) const {
  if (auto id = find(code)) return *id;
  throw ValidationError("unknown code '" + std::string(code) + "'");
}

// ---- ExportPanel ----------------------------------------------------------

ExportPanel::ExportPanel(std::vector<ExportEntry> entries, int min_year, int max_year,
                         const std::vector<std::size_t>& lines)
    : entries_(std::move(entries)), min_year_(min_year), max_year_(max_year) {
  if (min_year_ > max_year_) throw ValidationError("empty year range");
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.country.empty() || e.product.empty()) throw ValidationError("empty country or product code" + at_line(lines, i));
    if (!(e.value >= 0.0)) {
      throw ValidationError("negative export value " + csv::format_number(e.value) + at_line(lines, i));
    }
    if (e.year < min_year_ || e.year > max_year_) {
      throw ValidationError("year " + std::to_string(e.year) + " outside declared range" + at_line(lines, i));
    }
    std::string key = e.country + '\x1f' + e.product + '\x1f' + std::to_string(e.year);
    if (!seen.insert(std::move(key)).second) {
      throw ValidationError("duplicate key (" + e.country + ", " + e.product + ", " + std::to_string(e.year) + ")" +
                            at_line(lines, i));
    }
  }
}

std::set<int> ExportPanel::years() const {
  std::set<int> out;
  for (const auto& e : entries_) out.insert(e.year);
  return out;
}

std::vector<std::string> ExportPanel::countries() const {
  std::set<std::string> s;
  for (const auto& e : entries_) s.insert(e.country);
  return {s.begin(), s.end()};
}

std::vector<std::string> ExportPanel::products() const {
  std::set<std::string> s;
  for (const auto& e : entries_) s.insert(e.product);
  return {s.begin(), s.end()};
}

bool ExportPanel::has_year(int year) const {
  return std::any_of(entries_.begin(), entries_.end(), [year](const ExportEntry& e) { return e.year == year; });
}

Eigen::MatrixXd ExportPanel::matrix(const IndexMap& countries, const IndexMap& products, int year) const {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(countries.size()),
                                            static_cast<Eigen::Index>(products.size()));
  for (const auto& e : entries_) {
    if (e.year != year) continue;
    auto c = countries.find(e.country);
    auto p = products.find(e.product);
    if (c && p) x(static_cast<Eigen::Index>(*c), static_cast<Eigen::Index>(*p)) = e.value;
  }
  return x;
}

ExportPanel ExportPanel::restricted_to(const std::set<std::string>& countries) const {
  std::vector<ExportEntry> kept;
  for (const auto& e : entries_) {
    if (countries.count(e.country)) kept.push_back(e);
  }
  return ExportPanel(std::move(kept), min_year_, max_year_);
}

// ---- PovertyPanel ---------------------------------------------------------

PovertyPanel::PovertyPanel(std::vector<PovertyEntry> entries, const std::vector<std::size_t>& lines)
    : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.country.empty()) throw ValidationError("empty country code" + at_line(lines, i));
    if (!(e.headcount >= 0.0 && e.headcount <= 1.0)) {
      throw ValidationError("headcount out of range: " + csv::format_number(e.headcount) + " for " + e.country +
                            at_line(lines, i));
    }
    if (!index_.emplace(std::make_pair(e.country, e.year), e.headcount).second) {
      throw ValidationError("duplicate key (" + e.country + ", " + std::to_string(e.year) + ")" + at_line(lines, i));
    }
  }
}

std::optional<double> PovertyPanel::headcount(std::string_view country, int year) const {
  auto it = index_.find(std::make_pair(std::string(country), year));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::set<std::string> PovertyPanel::countries() const {
  std::set<std::string> out;
  for (const auto& e : entries_) out.insert(e.country);
  return out;
}

std::set<int> PovertyPanel::years() const {
  std::set<int> out;
  for (const auto& e : entries_) out.insert(e.year);
  return out;
}

std::vector<std::pair<int, double>> PovertyPanel::series(std::string_view country) const {
  std::vector<std::pair<int, double>> out;
  const std::string key(country);
  for (auto it = index_.lower_bound(std::make_pair(key, std::numeric_limits<int>::min()));
       it != index_.end() && it->first.first == key; ++it) {
    out.emplace_back(it->first.second, it->second);
  }
  return out;
}

// ---- ControlTable ---------------------------------------------------------

ControlTable::ControlTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    for (std::size_t j = i + 1; j < columns_.size(); ++j) {
      if (columns_[i] == columns_[j]) throw SchemaError("duplicate control column '" + columns_[i] + "'");
    }
  }
}

void ControlTable::add_row(const std::string& country, std::vector<std::optional<double>> values) {
  if (values.size() != columns_.size()) throw SchemaError("control row for " + country + " has wrong width");
  if (has_country(country)) throw ValidationError("duplicate control row for " + country);
  countries_.push_back(country);
  rows_.push_back(std::move(values));
}

std::optional<double> ControlTable::value(std::string_view country, std::string_view column) const {
  auto col = std::find(columns_.begin(), columns_.end(), column);
  if (col == columns_.end()) throw SchemaError("unknown control column '" + std::string(column) + "'");
  auto row = std::find(countries_.begin(), countries_.end(), country);
  if (row == countries_.end()) return std::nullopt;
  return rows_[static_cast<std::size_t>(row - countries_.begin())][static_cast<std::size_t>(col - columns_.begin())];
}

bool ControlTable::has_country(std::string_view country) const {
  return std::find(countries_.begin(), countries_.end(), country) != countries_.end();
}

std::size_t ControlTable::missing_cells() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += static_cast<std::size_t>(std::count(r.begin(), r.end(), std::nullopt));
  return n;
}

// ---- report ---------------------------------------------------------------

std::string IngestReport::to_json() const {
  nlohmann::ordered_json j;
  j["source"] = source;
  j["rows_read"] = rows_read;
  j["rows_dropped"] = rows_dropped;
  j["rows_modified"] = rows_modified;
  j["rows_flagged"] = rows_flagged;
  j["notes"] = notes;
  return j.dump(2);
}

// ---- loaders --------------------------------------------------------------

ExportPanel load_exports(std::istream& in, const ExportSchema& schema, IngestReport* report) {
  const auto table = csv::Table::parse(in);
  const std::size_t ci = table.column(schema.country);
  const std::size_t pi = table.column(schema.product);
  const std::size_t yi = table.column(schema.year);
  const std::size_t vi = table.column(schema.value);

  std::vector<ExportEntry> entries;
  std::vector<std::size_t> lines;
  for (const auto& rec : table.records()) {
    if (report) ++report->rows_read;
    if (rec.fields.size() != table.header().size()) {
      drop(report, rec.line, "expected " + std::to_string(table.header().size()) + " fields");
      continue;
    }
    const auto& country = rec.fields[ci];
    const auto& product = rec.fields[pi];
    if (country.empty() || product.empty()) {
      drop(report, rec.line, "empty country or product code");
      continue;
    }
    auto year = csv::parse_long(rec.fields[yi]);
    if (!year) {
      drop(report, rec.line, "unparseable year '" + rec.fields[yi] + "'");
      continue;
    }
    auto value = csv::parse_double(rec.fields[vi]);
    if (!value) {
      drop(report, rec.line, "unparseable value '" + rec.fields[vi] + "'");
      continue;
    }
    if (*value < 0.0) {
      throw ValidationError("negative export value " + rec.fields[vi] + " at line " + std::to_string(rec.line));
    }
    if (*year < schema.min_year || *year > schema.max_year) {
      drop(report, rec.line, "year " + std::to_string(*year) + " outside declared range");
      continue;
    }
    entries.push_back(ExportEntry{country, product, static_cast<int>(*year), *value});
    lines.push_back(rec.line);
  }
  return ExportPanel(std::move(entries), schema.min_year, schema.max_year, lines);
}

ExportPanel load_exports(const std::filesystem::path& path, const ExportSchema& schema, IngestReport* report) {
  if (report) report->source = path.string();
  return with_path(path, [&](std::istream& in) { return load_exports(in, schema, report); });
}

PovertyPanel load_poverty(std::istream& in, const PovertySchema& schema, IngestReport* report) {
  const auto table = csv::Table::parse(in);
  const std::size_t ci = table.column(schema.country);
  const std::size_t yi = table.column(schema.year);
  const std::size_t hi = table.column(schema.headcount);

  std::vector<PovertyEntry> entries;
  std::vector<std::size_t> lines;
  for (const auto& rec : table.records()) {
    if (report) ++report->rows_read;
    if (rec.fields.size() != table.header().size()) {
      drop(report, rec.line, "expected " + std::to_string(table.header().size()) + " fields");
      continue;
    }
    auto year = csv::parse_long(rec.fields[yi]);
    if (!year) {
      drop(report, rec.line, "unparseable year '" + rec.fields[yi] + "'");
      continue;
    }
    if (csv::is_missing(rec.fields[hi])) {
      drop(report, rec.line, "missing headcount");
      continue;
    }
    auto hc = csv::parse_double(rec.fields[hi]);
    if (!hc) {
      drop(report, rec.line, "unparseable headcount '" + rec.fields[hi] + "'");
      continue;
    }
    double value = *hc;
    if (schema.percent) {
      value /= 100.0;
      if (report) ++report->rows_modified;
    }
    if (!(value >= 0.0 && value <= 1.0)) {
      throw ValidationError("headcount out of range: " + rec.fields[hi] + " at line " + std::to_string(rec.line));
    }
    entries.push_back(PovertyEntry{rec.fields[ci], static_cast<int>(*year), value});
    lines.push_back(rec.line);
  }
  return PovertyPanel(std::move(entries), lines);
}

PovertyPanel load_poverty(const std::filesystem::path& path, const PovertySchema& schema, IngestReport* report) {
  if (report) report->source = path.string();
  return with_path(path, [&](std::istream& in) { return load_poverty(in, schema, report); });
}

ControlTable load_controls(std::istream& in, const std::string& country_column, IngestReport* report) {
  const auto table = csv::Table::parse(in);
  const std::size_t ci = table.column(country_column);
  std::vector<std::string> columns;
  for (std::size_t i = 0; i < table.header().size(); ++i) {
    if (i != ci) columns.push_back(table.header()[i]);
  }
  ControlTable controls(columns);
  for (const auto& rec : table.records()) {
    if (report) ++report->rows_read;
    if (rec.fields.size() != table.header().size()) {
      drop(report, rec.line, "expected " + std::to_string(table.header().size()) + " fields");
      continue;
    }
    std::vector<std::optional<double>> values;
    bool flagged = false;
    for (std::size_t i = 0; i < rec.fields.size(); ++i) {
      if (i == ci) continue;
      if (csv::is_missing(rec.fields[i])) {
        values.emplace_back(std::nullopt);
        flagged = true;
        continue;
      }
      auto v = csv::parse_double(rec.fields[i]);
      if (!v) {
        throw ValidationError("non-numeric control value '" + rec.fields[i] + "' at line " + std::to_string(rec.line));
      }
      values.emplace_back(*v);
    }
    if (flagged && report) ++report->rows_flagged;
    controls.add_row(rec.fields[ci], std::move(values));
  }
  return controls;
}

ControlTable load_controls(const std::filesystem::path& path, const std::string& country_column,
                           IngestReport* report) {
  if (report) report->source = path.string();
  return with_path(path, [&](std::istream& in) { return load_controls(in, country_column, report); });
}

void write_exports(std::ostream& out, const ExportPanel& panel) {
  csv::write_row(out, {"country", "product", "year", "value"});
  for (const auto& e : panel.entries()) {
    // Export values are written at full precision so the round trip is exact.
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, e.value);
    csv::write_row(out, {e.country, e.product, std::to_string(e.year), std::string(buf, res.ptr)});
  }
}

void write_poverty(std::ostream& out, const PovertyPanel& panel) {
  csv::write_row(out, {"country", "year", "headcount"});
  for (const auto& e : panel.entries()) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, e.headcount);
    csv::write_row(out, {e.country, std::to_string(e.year), std::string(buf, res.ptr)});
  }
}

// ---- align ----------------------------------------------------------------

std::size_t AlignedDataset::flagged_count() const {
  return static_cast<std::size_t>(std::count(poverty_missing.begin(), poverty_missing.end(), true));
}

AlignedDataset align(const ExportPanel& exports, const PovertyPanel& poverty, const ControlTable& controls,
                     JoinMode mode, IngestReport* report) {
  const auto trade = exports.countries();
  const auto pov = poverty.countries();
  std::set<std::string> common;
  for (const auto& c : trade) {
    if (pov.count(c)) common.insert(c);
  }
  if (common.empty()) throw ValidationError("alignment failed: no country has both trade and poverty data");

  AlignedDataset out;
  out.exports = mode == JoinMode::kIntersection ? exports.restricted_to(common) : exports;
  out.poverty = poverty;
  out.countries = IndexMap(out.exports.countries());
  out.products = IndexMap(out.exports.products());
  out.poverty_missing.assign(out.countries.size(), false);
  for (std::size_t i = 0; i < out.countries.size(); ++i) {
    if (!common.count(out.countries.code(i))) {
      out.poverty_missing[i] = true;
      if (report) {
        ++report->rows_flagged;
        report->notes.push_back("country " + out.countries.code(i) + ": no poverty data, excluded from PPI sums");
      }
    }
  }
  if (mode == JoinMode::kIntersection && report) {
    for (const auto& c : trade) {
      if (!common.count(c)) report->notes.push_back("country " + c + ": removed from trade panel (intersection)");
    }
  }

  out.controls = ControlTable(controls.columns());
  for (const auto& c : controls.countries()) {
    if (!out.countries.contains(c)) {
      out.dropped_control_rows.push_back(c);
      if (report) {
        ++report->rows_dropped;
        report->notes.push_back("control row " + c + ": country not in trade panel, dropped");
      }
      continue;
    }
    std::vector<std::optional<double>> values;
    for (const auto& col : controls.columns()) values.push_back(controls.value(c, col));
    out.controls.add_row(c, std::move(values));
  }
  return out;
}

}  // namespace povspace
