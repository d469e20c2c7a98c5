#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace yrisk {

// Plain comma-separated dialect: no quoting, no embedded commas. That is the
// survey-export format this library consumes and emits.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return std::string(s.substr(b, e - b));
}

struct CsvRows {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline CsvRows read_csv(std::istream& in) {
  CsvRows out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      out.header = split_csv_line(line);
      first = false;
      continue;
    }
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    out.rows.push_back(split_csv_line(line));
  }
  return out;
}

}  // namespace yrisk
