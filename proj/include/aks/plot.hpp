// plot.hpp
//
// SVG rendering of a score curve with its selected keyframes and the
// level-L bin boundaries. Output bytes depend only on the inputs.
#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>

#include "aks/core.hpp"
#include "aks/coverage.hpp"
#include "aks/io.hpp"

namespace aks {

struct PlotStyle {
  double width = 960.0;
  double height = 320.0;
  double margin = 40.0;
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
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

}  // namespace detail

inline std::string render_svg(const ScoreSeries& series, const KeyframeSelection& selection, int max_level,
                              const PlotStyle& style = {}) {
  selection.validate();
  if (selection.horizon != series.size())
    throw Error("selection horizon " + std::to_string(selection.horizon) + " does not match series length " +
                std::to_string(series.size()));
  if (max_level < 0) throw Error("max_level must be >= 0");

  const auto scores = series.scores();
  const std::size_t n = scores.size();
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  double lo = *lo_it, hi = *hi_it;
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double plot_w = style.width - 2 * style.margin;
  const double plot_h = style.height - 2 * style.margin;
  auto x_of = [&](double t) { return style.margin + (n > 1 ? t / static_cast<double>(n - 1) : 0.5) * plot_w; };
  auto y_of = [&](double s) { return style.margin + (1.0 - (s - lo) / (hi - lo)) * plot_h; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::num(style.width) + "\" height=\"" +
         detail::num(style.height) + "\" viewBox=\"0 0 " + detail::num(style.width) + " " +
         detail::num(style.height) + "\">\n";
  out += "<title>" + detail::xml_escape(std::string(to_string(selection.strategy))) + " keyframes, M=" +
         std::to_string(selection.indices.size()) + ", T=" + std::to_string(n) + "</title>\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + detail::num(style.width) + "\" height=\"" + detail::num(style.height) +
         "\" fill=\"white\"/>\n";

  // level-L bin boundaries; boundaries shared with coarser levels are drawn once
  if (max_level > 0 && n > 1) {
    std::vector<Index> cuts;
    for (const auto& r : level_ranges(n, max_level))
      if (r.lo > 0) cuts.push_back(r.lo);
    for (auto c : cuts) {
      const double x = x_of(static_cast<double>(c) - 0.5);
      out += "<line class=\"bin\" x1=\"" + detail::num(x) + "\" y1=\"" + detail::num(style.margin) + "\" x2=\"" +
             detail::num(x) + "\" y2=\"" + detail::num(style.height - style.margin) +
             "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";
    }
  }

  out += "<polyline class=\"scores\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.2\" points=\"";
  for (std::size_t t = 0; t < n; ++t) {
    if (t) out += ' ';
    out += detail::num(x_of(static_cast<double>(t))) + "," + detail::num(y_of(scores[t]));
  }
  out += "\"/>\n";

  for (auto i : selection.indices)
    out += "<circle class=\"keyframe\" cx=\"" + detail::num(x_of(static_cast<double>(i))) + "\" cy=\"" +
           detail::num(y_of(scores[i])) + "\" r=\"3.5\" fill=\"#d62728\"/>\n";

  out += "<text x=\"" + detail::num(style.margin) + "\" y=\"" + detail::num(style.height - 10) +
         "\" font-family=\"sans-serif\" font-size=\"11\">frame index (0.." + std::to_string(n - 1) +
         "), score range [" + format_double(*lo_it) + ", " + format_double(*hi_it) + "]</text>\n";
  out += "</svg>\n";
  return out;
}

/// Validates first, then writes the SVG to `path`.
inline void emit_plot(const ScoreSeries& series, const KeyframeSelection& selection, int max_level,
                      const std::filesystem::path& path, const PlotStyle& style = {}) {
  const auto svg = render_svg(series, selection, max_level, style);
  detail::write_file(path, svg);
}

}  // namespace aks
