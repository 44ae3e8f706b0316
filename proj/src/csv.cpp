#include "povspace/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "povspace/error.hpp"

namespace povspace::csv {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Reads one logical record, which may span several physical lines when a
// quoted field contains a newline. Returns false at end of input.
bool next_record(std::istream& in, std::size_t& line_no, std::vector<std::string>& fields) {
  fields.clear();
  std::string line;
  if (!std::getline(in, line)) return false;
  ++line_no;
  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i >= line.size()) {
      if (quoted) {
        std::string more;
        if (!std::getline(in, more)) {
          throw ValidationError("unterminated quoted field at line " + std::to_string(line_no));
        }
        ++line_no;
        field.push_back('\n');
        line = std::move(more);
        i = 0;
        continue;
      }
      break;
    }
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back(trim(field));
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
    ++i;
  }
  fields.emplace_back(trim(field));
  return true;
}

}  // namespace

Table Table::parse(std::istream& in) {
  Table t;
  std::size_t line_no = 0;
  std::vector<std::string> fields;
  if (!next_record(in, line_no, fields)) throw SchemaError("empty CSV: missing header row");
  if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
  t.header_ = fields;
  for (std::size_t i = 0; i < t.header_.size(); ++i) {
    for (std::size_t j = i + 1; j < t.header_.size(); ++j) {
      if (t.header_[i] == t.header_[j]) throw SchemaError("duplicate column '" + t.header_[i] + "'");
    }
  }
  while (next_record(in, line_no, fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    t.records_.push_back(Record{line_no, fields});
  }
  return t;
}

Table Table::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return parse(in);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
  auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header_.begin());
}

std::size_t Table::column(std::string_view name) const {
  if (auto idx = find_column(name)) return *idx;
  throw SchemaError("missing column '" + std::string(name) + "'");
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[64];
  for (int precision = 1; precision <= 12; ++precision) {
    auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, precision);
    double back = 0.0;
    std::from_chars(buf, res.ptr, back);
    if (back == value || precision == 12) return std::string(buf, res.ptr);
  }
  return {};
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long> parse_long(std::string_view text) {
  text = trim(text);
  long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

bool is_missing(std::string_view text) {
  text = trim(text);
  if (text.empty() || text == ".") return true;
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower == "na" || lower == "nan" || lower == "null" || lower == "n/a";
}

}  // namespace povspace::csv
