#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace povspace::csv {

struct Record {
  std::size_t line = 0;  // 1-based line number in the source
  std::vector<std::string> fields;
};

/// A parsed comma-separated file: one header row followed by records.
/// Quoted fields ("a,b", "say ""hi""") follow RFC 4180.
class Table {
 public:
  static Table parse(std::istream& in);
  static Table read(const std::filesystem::path& path);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<Record>& records() const { return records_; }

  std::optional<std::size_t> find_column(std::string_view name) const;
  /// Like find_column but throws SchemaError naming the column.
  std::size_t column(std::string_view name) const;

 private:
  std::vector<std::string> header_;
  std::vector<Record> records_;
};

/// Shortest representation that round-trips within 12 significant digits.
std::string format_number(double value);

/// Quotes a field only when it contains a separator, quote or newline.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

std::optional<double> parse_double(std::string_view text);
std::optional<long> parse_long(std::string_view text);

/// Cells treated as missing: empty, NA, NaN, null, "." (case-insensitive).
bool is_missing(std::string_view text);

}  // namespace povspace::csv
