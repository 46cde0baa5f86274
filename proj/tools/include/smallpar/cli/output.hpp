#pragma once

#include "smallpar/common.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace smallpar::cli {

/// Shortest round-trip decimal form; "nan", "inf" and "-inf" otherwise.
std::string format_number(double v);

struct CsvHeader {
  std::string version;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
};

/// "# smallpar <version> config-hash=<16 hex digits> seed=<n>", extra
/// comment lines, the column row, then the data rows.
void write_csv(std::ostream& out, const Table& table, const CsvHeader& header,
               const std::vector<std::string>& comments = {});

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
};

/// Columns of a table as series against column `x_column` (-1: row index).
Plot plot_columns(const Table& table, int x_column, const std::vector<int>& y_columns,
                  std::string title);

/// SVG 1.1 document: frame, axis ticks, labels and one polyline per series.
/// Non-finite points (and non-positive ones on log axes) are skipped.
std::string render_svg(const Plot& plot);

}  // namespace smallpar::cli
