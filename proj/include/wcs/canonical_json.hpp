#pragma once

// Canonical JSON: sorted keys, two-space indent, floats printed with 17
// significant digits, integers verbatim. Output is byte-identical for equal
// values, and parsing it back yields the same doubles.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "wcs/error.hpp"
#include "wcs/interchange.hpp"

namespace wcs {

using json = nlohmann::json;

inline std::string format_fixed17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  // Keep floats recognizable as floats on re-read.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

namespace detail {

inline void check_finite(const json& j, const std::string& path) {
  if (j.is_number_float() && !std::isfinite(j.get<double>()))
    throw ValidationError("report field '" + path + "' is not finite");
  if (j.is_object())
    for (auto it = j.begin(); it != j.end(); ++it) check_finite(it.value(), path + "." + it.key());
  if (j.is_array())
    for (std::size_t i = 0; i < j.size(); ++i) check_finite(j[i], path + "[" + std::to_string(i) + "]");
}

inline void dump_canonical(const json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      // nlohmann::json objects are std::map-backed, so iteration is key-sorted.
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in + json(it.key()).dump() + ": ";
        dump_canonical(it.value(), out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad_in;
        dump_canonical(j[i], out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float:
      out += format_fixed17(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

}  // namespace detail

inline std::string canonical_dump(const json& j) {
  detail::check_finite(j, "$");
  std::string out;
  detail::dump_canonical(j, out, 0);
  out += "\n";
  return out;
}

/// Rejects non-finite values before touching the filesystem; atomic rename.
inline void write_report(const json& report, const std::filesystem::path& path) {
  const std::string text = canonical_dump(report);
  detail::write_file_atomic(path, text);
}

inline json read_report(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), e.byte, e.what());
  }
}

}  // namespace wcs
