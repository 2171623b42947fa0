#include "cfee/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace cfee::csv {

std::string format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::runtime_error("csv: missing column '" + std::string(name) + "'");
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path.string());
  Table t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (first) {
      t.header = std::move(fields);
      first = false;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw std::runtime_error("csv: ragged row in " + path.string());
    }
    t.rows.push_back(std::move(fields));
  }
  if (first) throw std::runtime_error("csv: empty file " + path.string());
  return t;
}

}  // namespace cfee::csv
