#pragma once

// Summary-CSV parsing and SVG chart emission: an RMSE-vs-setting line chart
// next to per-setting boxes (q1..q3 with the median marked).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "wsnloc/bench.hpp"
#include "wsnloc/error.hpp"

namespace wsnloc {

struct SummaryRow {
  std::string experiment;
  double setting = 0.0;
  std::string method;
  double rmse = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  std::size_t n_outliers = 0;
  std::size_t n_failed = 0;
};

inline std::vector<SummaryRow> summary_rows(const ExperimentReport& report) {
  std::vector<SummaryRow> out;
  for (const auto& r : report.rows) {
    out.push_back({report.name, r.setting, to_string(r.method), r.rmse, r.box.median, r.box.q1,
                   r.box.q3, r.box.outliers.size(), r.n_failed});
  }
  return out;
}

inline std::vector<SummaryRow> parse_summary_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("summary CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSummaryCsvHeader) throw ParseError("unexpected summary CSV header: " + line);

  auto num = [](const std::string& s, std::size_t lineno) {
    if (s == "nan") return std::nan("");
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ParseError("summary CSV line " + std::to_string(lineno) + ": bad number '" + s + "'");
  };

  std::vector<SummaryRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 9) {
      throw ParseError("summary CSV line " + std::to_string(lineno) + ": expected 9 fields");
    }
    SummaryRow r;
    r.experiment = f[0];
    r.setting = num(f[1], lineno);
    r.method = f[2];
    r.rmse = num(f[3], lineno);
    r.median = num(f[4], lineno);
    r.q1 = num(f[5], lineno);
    r.q3 = num(f[6], lineno);
    r.n_outliers = static_cast<std::size_t>(num(f[7], lineno));
    r.n_failed = static_cast<std::size_t>(num(f[8], lineno));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError("summary CSV has no data rows");
  return rows;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

inline std::string render_svg(const std::vector<SummaryRow>& rows) {
  if (rows.empty()) throw InvalidArgument("nothing to plot");
  constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  std::vector<double> settings;
  std::vector<std::string> methods;
  std::vector<std::string> experiments;
  double y_max = 0.0;
  for (const auto& r : rows) {
    if (std::find(settings.begin(), settings.end(), r.setting) == settings.end()) settings.push_back(r.setting);
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    if (std::find(experiments.begin(), experiments.end(), r.experiment) == experiments.end()) {
      experiments.push_back(r.experiment);
    }
    for (double v : {r.rmse, r.q3}) {
      if (std::isfinite(v)) y_max = std::max(y_max, v);
    }
  }
  std::sort(settings.begin(), settings.end());
  if (y_max <= 0.0) y_max = 1.0;
  y_max *= 1.1;

  constexpr double kPanelW = 400, kPanelH = 300, kLeft = 60, kTop = 50, kGap = 80;
  const double width = kLeft + 2 * kPanelW + kGap + 40;
  const double height = kTop + kPanelH + 90;
  const auto setting_index = [&](double s) {
    return static_cast<double>(std::find(settings.begin(), settings.end(), s) - settings.begin());
  };
  const double slot = kPanelW / static_cast<double>(settings.size());
  const auto x_of = [&](double panel_x, double s) { return panel_x + (setting_index(s) + 0.5) * slot; };
  const auto y_of = [&](double v) { return kTop + kPanelH * (1.0 - v / y_max); };

  std::string title;
  for (const auto& e : experiments) title += (title.empty() ? "" : ", ") + e;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::fmt(width) << "\" height=\""
      << detail::fmt(height) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << detail::fmt(width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << detail::xml_escape(title) << "</text>\n";

  const double panels[2] = {kLeft, kLeft + kPanelW + kGap};
  const char* panel_titles[2] = {"RMSE", "E_i (box: q1-q3, bar: median)"};
  for (int p = 0; p < 2; ++p) {
    const double px = panels[p];
    svg << "<text x=\"" << detail::fmt(px + kPanelW / 2) << "\" y=\"" << detail::fmt(kTop - 10)
        << "\" text-anchor=\"middle\">" << panel_titles[p] << "</text>\n";
    svg << "<rect x=\"" << detail::fmt(px) << "\" y=\"" << detail::fmt(kTop) << "\" width=\""
        << detail::fmt(kPanelW) << "\" height=\"" << detail::fmt(kPanelH)
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double v = y_max * t / 4.0;
      svg << "<text x=\"" << detail::fmt(px - 6) << "\" y=\"" << detail::fmt(y_of(v) + 4)
          << "\" text-anchor=\"end\">" << detail::label(std::round(v * 1000) / 1000) << "</text>\n";
    }
    for (double s : settings) {
      svg << "<text x=\"" << detail::fmt(x_of(px, s)) << "\" y=\"" << detail::fmt(kTop + kPanelH + 16)
          << "\" text-anchor=\"middle\">" << detail::label(s) << "</text>\n";
    }
  }

  for (std::size_t k = 0; k < methods.size(); ++k) {
    const char* color = kPalette[k % std::size(kPalette)];
    std::vector<const SummaryRow*> mine;
    for (const auto& r : rows) {
      if (r.method == methods[k]) mine.push_back(&r);
    }
    std::sort(mine.begin(), mine.end(), [](auto* a, auto* b) { return a->setting < b->setting; });

    std::string points;
    for (const auto* r : mine) {
      if (!std::isfinite(r->rmse)) continue;
      points += detail::fmt(x_of(panels[0], r->setting)) + "," + detail::fmt(y_of(r->rmse)) + " ";
      svg << "<circle cx=\"" << detail::fmt(x_of(panels[0], r->setting)) << "\" cy=\""
          << detail::fmt(y_of(r->rmse)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    if (!points.empty()) {
      svg << "<polyline points=\"" << points << "\" fill=\"none\" stroke=\"" << color << "\"/>\n";
    }

    const double box_w = slot / static_cast<double>(methods.size() + 1);
    for (const auto* r : mine) {
      if (!std::isfinite(r->q1) || !std::isfinite(r->q3)) continue;
      const double cx = panels[1] + setting_index(r->setting) * slot +
                        box_w * (static_cast<double>(k) + 1.0);
      svg << "<rect x=\"" << detail::fmt(cx - box_w * 0.4) << "\" y=\"" << detail::fmt(y_of(r->q3))
          << "\" width=\"" << detail::fmt(box_w * 0.8) << "\" height=\""
          << detail::fmt(std::max(0.0, y_of(r->q1) - y_of(r->q3))) << "\" fill=\"none\" stroke=\""
          << color << "\"/>\n";
      svg << "<line x1=\"" << detail::fmt(cx - box_w * 0.4) << "\" x2=\"" << detail::fmt(cx + box_w * 0.4)
          << "\" y1=\"" << detail::fmt(y_of(r->median)) << "\" y2=\"" << detail::fmt(y_of(r->median))
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    }

    const double ly = kTop + kPanelH + 40 + 16.0 * static_cast<double>(k);
    svg << "<rect x=\"" << detail::fmt(kLeft) << "\" y=\"" << detail::fmt(ly - 9)
        << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
    svg << "<text x=\"" << detail::fmt(kLeft + 16) << "\" y=\"" << detail::fmt(ly) << "\">"
        << detail::xml_escape(methods[k]) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace wsnloc
