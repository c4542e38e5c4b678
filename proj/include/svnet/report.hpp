// SPDX-License-Identifier: Apache-2.0
//
// Tabular and plot output: report.csv scalar columns, CSV row joining
// and minimal static SVG charts.
#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "svnet/sim.hpp"

namespace svnet {

/// Scalar SimReport columns, units in the names; order matches report_values.
const std::vector<std::string>& report_columns();
std::vector<std::string> report_values(const SimReport& r);

/// Quotes fields containing separators, quotes or newlines.
std::string csv_row(std::span<const std::string> fields);

/// Shortest round-trippable decimal; NaN as an empty field.
std::string csv_number(double v);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Line chart with point markers; non-finite points break the line.
void write_svg_lines(std::ostream& out, const std::string& title, const std::string& x_label,
                     const std::string& y_label, std::span<const Series> series);

/// Histogram over `bins` equal-width bins spanning the data.
void write_svg_histogram(std::ostream& out, const std::string& title, const std::string& x_label,
                         std::span<const double> values, std::size_t bins = 20);

}  // namespace svnet
