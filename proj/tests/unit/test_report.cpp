// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "approx.hpp"

#include <cmath>
#include <sstream>

#include "svnet/report.hpp"

using namespace svnet;

TEST_CASE("csv fields are quoted only when needed") {
  const std::vector<std::string> f{"plain", "a,b", "say \"hi\"", ""};
  CHECK(csv_row(f) == "plain,\"a,b\",\"say \"\"hi\"\"\",");
}

TEST_CASE("csv numbers round-trip and NaN is empty") {
  for (double v : {0.1, 1.0 / 3.0, 6.88e-3, 1e20, -2.5}) CHECK(std::stod(csv_number(v)) == v);
  CHECK(csv_number(std::nan("")).empty());
}

TEST_CASE("report columns and values align") {
  SimReport r;
  r.qna_e2ed = 0.01;
  CHECK(report_values(r).size() == report_columns().size());
  const auto v = report_values(SimReport{});
  CHECK(v.back().empty());  // no overloaded station
}

TEST_CASE("svg output is a complete document") {
  std::ostringstream out;
  const std::vector<Series> s{{"a<b", {1, 2, 3}, {1, NAN, 3}}, {"c", {1, 2}, {2, 1}}};
  write_svg_lines(out, "title & more", "x", "y", s);
  const auto svg = out.str();
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("a&lt;b") != std::string::npos);
  CHECK(svg.find("title &amp; more") != std::string::npos);

  std::ostringstream hist;
  const std::vector<double> values{1, 2, 2, 3, 3, 3};
  write_svg_histogram(hist, "h", "x", values, 3);
  CHECK(hist.str().find("</svg>") != std::string::npos);
}
