#pragma once

// Minimal RFC 4180 CSV reading/writing: quoted fields, doubled quotes,
// header row required.

#include <charconv>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "decamin/error.hpp"

namespace decamin::csv {

struct Table {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> find_column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
  std::size_t column(std::string_view name) const {
    if (auto c = find_column(name)) return *c;
    throw InputError(source + ": missing CSV column '" + std::string(name) + "'");
  }
};

inline std::vector<std::string> parse_line(std::istream& in, bool& ok) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  char ch;
  while (in.get(ch)) {
    any = true;
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      break;
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  ok = any;
  if (any) fields.push_back(std::move(field));
  return fields;
}

inline Table read(std::istream& in, std::string source) {
  Table t;
  t.source = std::move(source);
  bool ok = false;
  t.header = parse_line(in, ok);
  if (!ok) throw InputError(t.source + ": empty CSV");
  while (true) {
    auto row = parse_line(in, ok);
    if (!ok) break;
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() < t.header.size()) row.resize(t.header.size());
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline double to_double(const std::string& text, std::string_view what) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw InputError("not a number in column " + std::string(what) + ": '" + text + "'");
  return v;
}

inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

}  // namespace decamin::csv
