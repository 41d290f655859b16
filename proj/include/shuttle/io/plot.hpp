/* Copyright 2026 The Shuttle Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

// Minimal static SVG line plots: a median curve with a shaded quantile band.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "shuttle/io/tables.hpp"

namespace shuttle::io {

struct BandSeries {
  std::string label;
  std::vector<double> x, lo, mid, hi;
};

struct PlotStyle {
  std::string title, x_label, y_label;
  bool log_y = false;
  int width = 720, height = 440;
};

inline std::string band_plot_svg(const std::vector<BandSeries>& series, const PlotStyle& st) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  const double ml = 70, mr = 20, mt = 36, mb = 50;
  const double pw = st.width - ml - mr, ph = st.height - mt - mb;
  auto ty = [&](double y) { return st.log_y ? std::log10(std::max(y, 1e-300)) : y; };

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      for (double y : {s.lo[i], s.mid[i], s.hi[i]}) {
        if (!std::isfinite(y) || (st.log_y && y <= 0.0)) continue;
        y0 = std::min(y0, ty(y));
        y1 = std::max(y1, ty(y));
      }
    }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return mt + (1.0 - (std::clamp(ty(y), y0, y1) - y0) / (y1 - y0)) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << st.width << "\" height=\"" << st.height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << st.width / 2 << "\" y=\"20\" text-anchor=\"middle\">" << st.title << "</text>\n"
    << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0, fy = y0 + (y1 - y0) * k / 4.0;
    o << "<text x=\"" << px(fx) << "\" y=\"" << mt + ph + 16 << "\" text-anchor=\"middle\">" << num(fx)
      << "</text>\n";
    const double label = st.log_y ? std::pow(10.0, fy) : fy;
    const double ypix = mt + (1.0 - k / 4.0) * ph;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", label);
    o << "<text x=\"" << ml - 6 << "\" y=\"" << ypix + 4 << "\" text-anchor=\"end\">" << buf << "</text>\n";
  }
  o << "<text x=\"" << ml + pw / 2 << "\" y=\"" << st.height - 12 << "\" text-anchor=\"middle\">"
    << st.x_label << "</text>\n"
    << "<text x=\"16\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << mt + ph / 2 << ")\">" << st.y_label << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* c = colors[si % 6];
    o << "<polygon fill=\"" << c << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) o << px(s.x[i]) << "," << py(s.hi[i]) << " ";
    for (std::size_t i = s.x.size(); i-- > 0;) o << px(s.x[i]) << "," << py(s.lo[i]) << " ";
    o << "\"/>\n<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) o << px(s.x[i]) << "," << py(s.mid[i]) << " ";
    o << "\"/>\n<text x=\"" << ml + pw - 8 << "\" y=\"" << mt + 16 + 14 * si
      << "\" text-anchor=\"end\" fill=\"" << c << "\">" << s.label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

inline void write_band_plot(const std::filesystem::path& path, const std::vector<BandSeries>& series,
                            const PlotStyle& st) {
  write_atomic(path, band_plot_svg(series, st));
}

}  // namespace shuttle::io
