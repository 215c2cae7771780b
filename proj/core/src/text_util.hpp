#pragma once

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "asclens/error.hpp"

namespace asclens::detail {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

/// Splits CSV text into rows of fields. No quoting: every table written by
/// this library is plain comma separated.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) {
      std::vector<std::string> fields;
      std::size_t f = 0;
      for (;;) {
        const auto comma = line.find(',', f);
        fields.emplace_back(line.substr(f, comma == std::string_view::npos ? line.npos : comma - f));
        if (comma == std::string_view::npos) break;
        f = comma + 1;
      }
      rows.push_back(std::move(fields));
    }
    start = end + 1;
  }
  return rows;
}

inline void expect_header(const std::vector<std::vector<std::string>>& rows,
                          const std::vector<std::string>& header) {
  if (rows.empty() || rows.front() != header) {
    std::string expected;
    for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
    throw Error(Errc::invalid_argument, "CSV header must be '" + expected + "'");
  }
}

inline double parse_double(const std::string& field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::invalid_argument, "bad numeric field '" + field + "'");
  }
}

inline long long parse_int(const std::string& field) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::invalid_argument, "bad integer field '" + field + "'");
  }
}

}  // namespace asclens::detail
