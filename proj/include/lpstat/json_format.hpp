#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include "json.hpp"

namespace lpstat {

namespace detail {

inline void append_number(std::string& out, double v)
{
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  out += buf;
  // bare integers like "2" are still valid JSON numbers; nothing to fix
}

inline void dump_with_precision(const nlohmann::json& j, std::string& out, int depth)
{
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(depth + 1) * 2, ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        out += nlohmann::json(it.key()).dump();
        out += ": ";
        dump_with_precision(it.value(), out, depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& el : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        dump_with_precision(el, out, depth + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      append_number(out, j.get<double>());
      return;
    default:
      out += j.dump();  // strings, ints, bools, null
      return;
  }
}

}  // namespace detail

//! Serializes a document with object keys in sorted order (nlohmann's
//! default map ordering), two-space indentation, and floating-point
//! numbers at 12 significant digits — the reproducible output format.
//! Non-finite numbers serialize as null.
inline std::string dump_json(const nlohmann::json& j)
{
  std::string out;
  detail::dump_with_precision(j, out, 0);
  out += "\n";
  return out;
}

//! The same 12-significant-digit rendering for a single number, used by
//! the CSV emitters so both formats agree.
inline std::string format_number(double v)
{
  std::string out;
  detail::append_number(out, v);
  return out;
}

}  // namespace lpstat
