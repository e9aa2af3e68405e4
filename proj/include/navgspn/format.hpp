#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "navgspn/error.hpp"

namespace navgspn {

enum class OutputFormat { text, csv, json };

inline OutputFormat parse_format(std::string_view s) {
  if (s == "text") return OutputFormat::text;
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw InputError("unknown format '" + std::string(s) + "' (text|csv|json)");
}

namespace detail {
inline std::string num(double v, const char* fmt = "%.12g") {
  if (std::isinf(v)) return "inf";
  char buf[48];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}
// JSON never carries float infinities; unbounded values become "inf".
inline nlohmann::ordered_json json_num(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}
}  // namespace detail

}  // namespace navgspn
