#ifndef CFEE_CSV_HPP_
#define CFEE_CSV_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cfee::csv {

/// Shortest decimal form that round-trips a double (17 significant digits).
std::string format(double v);

/// Joins fields with commas.
std::string join(const std::vector<std::string>& fields);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by header name; throws std::runtime_error if absent.
  std::size_t column(std::string_view name) const;
};

/// Reads a comma-separated file with a header row. No quoting support.
Table read(const std::filesystem::path& path);

std::vector<std::string> split(std::string_view line, char sep = ',');

}  // namespace cfee::csv

#endif  // CFEE_CSV_HPP_
