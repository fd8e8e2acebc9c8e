#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "empirical.hpp"
#include "errors.hpp"

namespace lpstat {

struct Column {
  std::string name;
  std::vector<double> values;
  DistKind kind = DistKind::continuous_sample;
  bool kind_declared = false;
  std::size_t distinct = 0;
};

struct Dataset {
  std::vector<Column> columns;
  std::size_t rows = 0;
  std::size_t dropped_rows = 0;

  const Column& column(const std::string& name) const
  {
    for (const auto& c : columns) {
      if (c.name == name) return c;
    }
    throw ValidationError("column not found: " + name);
  }
  bool has_column(const std::string& name) const
  {
    return std::any_of(columns.begin(), columns.end(),
                       [&](const Column& c) { return c.name == name; });
  }
};

//! Kind inference for a column: continuous when the distinct-value count
//! exceeds max(20, sqrt(n)), discrete otherwise.
inline DistKind infer_kind(std::size_t distinct, std::size_t n)
{
  const double bar = std::max(20.0, std::sqrt(static_cast<double>(n)));
  return static_cast<double>(distinct) > bar ? DistKind::continuous_sample
                                             : DistKind::discrete_sample;
}

namespace detail {

//! Minimal RFC-4180 record reader: quoted fields, doubled quotes,
//! embedded separators/newlines inside quotes, \r\n and \n endings.
inline std::vector<std::vector<std::string>> read_csv_records(const std::string& text)
{
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;

  auto end_field = [&] {
    record.push_back(field);
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    records.push_back(record);
    record.clear();
    any = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        end_field();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any || !field.empty() || !record.empty()) end_record();
        break;
      default:
        field += c;
        any = true;
    }
  }
  if (quoted)
    throw ValidationError("CSV parse error: unterminated quoted field");
  if (any || !field.empty() || !record.empty()) end_record();
  return records;
}

inline std::string trim(const std::string& s)
{
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return s.substr(b, e - b);
}

inline bool is_missing(const std::string& cell)
{
  static const std::set<std::string> tokens = {"", "NA", "na", "NaN", "nan", "NULL", "null"};
  return tokens.count(trim(cell)) > 0;
}

inline double parse_number(const std::string& cell, const std::string& column,
                           std::size_t row)
{
  const std::string t = trim(cell);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ValidationError("column '" + column + "' row " + std::to_string(row) +
                          ": cannot parse '" + t + "' as a number");
  return v;
}

}  // namespace detail

//! Reads a header-row CSV, keeping the selected columns (all columns
//! when the selection is empty). Rows with a missing value in any
//! selected column are dropped (the count is reported on the Dataset);
//! a non-numeric cell in a selected column is an error naming the row.
//! Kind hints (column name -> kind) override the distinct-count
//! inference.
inline Dataset ingest_csv(const std::string& path,
                          const std::vector<std::string>& selected = {},
                          const std::map<std::string, DistKind>& hints = {})
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ValidationError("cannot open input file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF)
    text.erase(0, 3);

  const auto records = detail::read_csv_records(text);
  if (records.empty())
    throw ValidationError("empty CSV file: " + path);
  const auto& header = records.front();

  std::vector<std::size_t> keep;
  if (selected.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) keep.push_back(c);
  } else {
    for (const auto& name : selected) {
      auto it = std::find_if(header.begin(), header.end(), [&](const std::string& h) {
        return detail::trim(h) == name;
      });
      if (it == header.end())
        throw ValidationError("column not found: " + name);
      keep.push_back(static_cast<std::size_t>(it - header.begin()));
    }
  }

  Dataset ds;
  ds.columns.resize(keep.size());
  for (std::size_t c = 0; c < keep.size(); ++c)
    ds.columns[c].name = detail::trim(header[keep[c]]);

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size())
      throw ValidationError("row " + std::to_string(r) + ": expected " +
                            std::to_string(header.size()) + " cells, found " +
                            std::to_string(rec.size()));
    bool missing = false;
    for (std::size_t c = 0; c < keep.size(); ++c) {
      if (detail::is_missing(rec[keep[c]])) {
        missing = true;
        break;
      }
    }
    if (missing) {
      ++ds.dropped_rows;
      continue;
    }
    for (std::size_t c = 0; c < keep.size(); ++c)
      ds.columns[c].values.push_back(
          detail::parse_number(rec[keep[c]], ds.columns[c].name, r));
    ++ds.rows;
  }
  if (ds.rows == 0)
    throw ValidationError("no usable rows after dropping missing values: " + path);

  for (auto& col : ds.columns) {
    std::vector<double> v = col.values;
    std::sort(v.begin(), v.end());
    col.distinct = static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
    auto hint = hints.find(col.name);
    if (hint != hints.end()) {
      col.kind = hint->second;
      col.kind_declared = true;
    } else {
      col.kind = infer_kind(col.distinct, ds.rows);
    }
  }
  return ds;
}

}  // namespace lpstat
