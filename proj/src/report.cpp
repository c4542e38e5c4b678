// SPDX-License-Identifier: Apache-2.0
#include "svnet/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace svnet {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  void include(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (hi <= lo) hi = lo + 1.0;
  }
};

class Canvas {
 public:
  Canvas(std::ostream& out, Axis x, Axis y) : out_(out), x_(x), y_(y) {}

  double px(double v) const { return kLeft + (v - x_.lo) / (x_.hi - x_.lo) * (kWidth - kLeft - kRight); }
  double py(double v) const { return kHeight - kBottom - (v - y_.lo) / (y_.hi - y_.lo) * (kHeight - kTop - kBottom); }

  void frame(const std::string& title, const std::string& xl, const std::string& yl) {
    out_ << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">)",
                        kWidth, kHeight)
         << "\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out_ << fmt::format(R"(<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>)", kWidth / 2,
                        escape_xml(title))
         << "\n";
    const double x0 = px(x_.lo), x1 = px(x_.hi), y0 = py(y_.lo), y1 = py(y_.hi);
    out_ << fmt::format(R"(<path d="M{:.1f},{:.1f}H{:.1f}M{:.1f},{:.1f}V{:.1f}" stroke="black" fill="none"/>)", x0, y0,
                        x1, x0, y0, y1)
         << "\n";
    for (int i = 0; i <= 4; ++i) {
      const double xv = x_.lo + (x_.hi - x_.lo) * i / 4.0, yv = y_.lo + (y_.hi - y_.lo) * i / 4.0;
      out_ << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" text-anchor="middle">{:.4g}</text>)", px(xv), y0 + 16, xv)
           << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" text-anchor="end">{:.4g}</text>)", x0 - 6, py(yv) + 4, yv)
           << "\n";
    }
    out_ << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" text-anchor="middle">{}</text>)", (x0 + x1) / 2, kHeight - 12,
                        escape_xml(xl))
         << fmt::format(R"svg(<text x="16" y="{:.1f}" text-anchor="middle" transform="rotate(-90 16 {:.1f})">{}</text>)svg",
                        (y0 + y1) / 2, (y0 + y1) / 2, escape_xml(yl))
         << "\n";
  }

 private:
  std::ostream& out_;
  Axis x_, y_;
};

}  // namespace

const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols{
      "vehicles",         "sources",         "sent",           "delivered",        "dropped",
      "in_flight",        "pdr",             "pdr_zero_denominator", "mean_e2ed_s", "delivered_bits",
      "throughput_pps",   "throughput_bps",  "churn",          "holds_no_route",   "failed_attempts",
      "route_outage_node_s", "initial_chain_length", "bootstrapped", "qna_e2ed_s", "qna_throughput_pps",
      "qna_overloaded_station"};
  return cols;
}

std::vector<std::string> report_values(const SimReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? csv_number(*v) : std::string(); };
  return {std::to_string(r.vehicles),
          std::to_string(r.sources),
          std::to_string(r.sent),
          std::to_string(r.delivered),
          std::to_string(r.dropped),
          std::to_string(r.in_flight),
          csv_number(r.pdr),
          r.pdr_zero_denominator ? "1" : "0",
          csv_number(r.mean_e2ed),
          csv_number(r.delivered_bits),
          csv_number(r.throughput_pps),
          csv_number(r.throughput_bps),
          std::to_string(r.churn),
          std::to_string(r.holds_no_route),
          std::to_string(r.failed_attempts),
          csv_number(r.route_outage),
          std::to_string(r.initial_chain_length),
          r.bootstrapped ? "1" : "0",
          opt(r.qna_e2ed),
          opt(r.qna_throughput),
          r.qna_overloaded_station ? std::to_string(*r.qna_overloaded_station) : std::string()};
}

std::string csv_row(std::span<const std::string> fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    const auto& f = fields[i];
    if (f.find_first_of(",\"\n\r") == std::string::npos) {
      out += f;
      continue;
    }
    out += '"';
    for (char c : f) {
      if (c == '"') out += '"';
      out += c;
    }
    out += '"';
  }
  return out;
}

std::string csv_number(double v) {
  if (std::isnan(v)) return {};
  return fmt::format("{}", v);
}

void write_svg_lines(std::ostream& out, const std::string& title, const std::string& x_label,
                     const std::string& y_label, std::span<const Series> series) {
  Axis xa{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  Axis ya{0.0, -std::numeric_limits<double>::infinity()};  // y axis starts at zero
  for (const auto& s : series) {
    for (double v : s.x) xa.include(v);
    for (double v : s.y) ya.include(v);
  }
  if (!std::isfinite(xa.lo)) xa = {};
  if (!std::isfinite(ya.hi)) ya = {};
  xa.pad();
  ya.pad();
  Canvas c(out, xa, ya);
  c.frame(title, x_label, y_label);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string d;
    bool pen = false;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        pen = false;
        continue;
      }
      d += fmt::format("{}{:.1f},{:.1f}", pen ? "L" : "M", c.px(s.x[i]), c.py(s.y[i]));
      pen = true;
      out << fmt::format(R"(<circle cx="{:.1f}" cy="{:.1f}" r="2.5" fill="{}"/>)", c.px(s.x[i]), c.py(s.y[i]), color)
          << "\n";
    }
    if (!d.empty()) out << fmt::format(R"(<path d="{}" stroke="{}" fill="none"/>)", d, color) << "\n";
    const double ly = kTop + 18.0 * static_cast<double>(k);
    out << fmt::format(R"(<rect x="{}" y="{:.1f}" width="12" height="3" fill="{}"/>)", kWidth - kRight + 12, ly, color)
        << fmt::format(R"(<text x="{}" y="{:.1f}">{}</text>)", kWidth - kRight + 30, ly + 5, escape_xml(s.label))
        << "\n";
  }
  out << "</svg>\n";
}

void write_svg_histogram(std::ostream& out, const std::string& title, const std::string& x_label,
                         std::span<const double> values, std::size_t bins) {
  bins = std::max<std::size_t>(bins, 1);
  Axis xa{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (double v : values) xa.include(v);
  if (!std::isfinite(xa.lo)) xa = {};
  xa.pad();
  std::vector<std::size_t> counts(bins, 0);
  const double width = (xa.hi - xa.lo) / static_cast<double>(bins);
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    const auto b = std::min(bins - 1, static_cast<std::size_t>((v - xa.lo) / width));
    ++counts[b];
  }
  Axis ya{0.0, static_cast<double>(*std::max_element(counts.begin(), counts.end()))};
  ya.pad();
  Canvas c(out, xa, ya);
  c.frame(title, x_label, "count");
  for (std::size_t b = 0; b < bins; ++b) {
    const double x0 = c.px(xa.lo + width * static_cast<double>(b)), x1 = c.px(xa.lo + width * static_cast<double>(b + 1));
    const double y0 = c.py(0.0), y1 = c.py(static_cast<double>(counts[b]));
    out << fmt::format(R"(<rect x="{:.1f}" y="{:.1f}" width="{:.1f}" height="{:.1f}" fill="{}" stroke="white"/>)", x0,
                       y1, std::max(0.0, x1 - x0), std::max(0.0, y0 - y1), kPalette[0])
        << "\n";
  }
  out << "</svg>\n";
}

}  // namespace svnet
