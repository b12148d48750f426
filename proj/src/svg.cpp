// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#include "nftk/svg.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace nftk {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Range {
  double lo = 0.0, hi = 1.0;
};

Range nice_range(double lo, double hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi))) return {0.0, 1.0};
  if (lo == hi) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

void write_svg_lineplot(std::ostream& os, const std::string& title, const std::string& x_label,
                        const std::string& y_label, const std::vector<SvgSeries>& series) {
  const int width = 760, height = 480;
  const int ml = 70, mr = 160, mt = 40, mb = 55;
  const int pw = width - ml - mr, ph = height - mt - mb;

  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  const Range xr = nice_range(x_lo, x_hi), yr = nice_range(y_lo, y_hi);
  const auto px = [&](double x) { return ml + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  const auto py = [&](double y) { return mt + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
     << "' font-family='sans-serif' font-size='12'>\n";
  os << "<rect width='100%' height='100%' fill='white'/>\n";
  os << "<text x='" << ml + pw / 2 << "' y='20' text-anchor='middle' font-size='15'>" << title
     << "</text>\n";

  // axes and ticks
  os << "<rect x='" << ml << "' y='" << mt << "' width='" << pw << "' height='" << ph
     << "' fill='none' stroke='black'/>\n";
  const int ticks = 6;
  for (int i = 0; i <= ticks; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / ticks;
    const double fy = yr.lo + (yr.hi - yr.lo) * i / ticks;
    char label[48];
    std::snprintf(label, sizeof label, "%.4g", fx);
    os << "<line x1='" << px(fx) << "' y1='" << mt + ph << "' x2='" << px(fx) << "' y2='"
       << mt + ph + 5 << "' stroke='black'/>\n";
    os << "<text x='" << px(fx) << "' y='" << mt + ph + 20 << "' text-anchor='middle'>" << label
       << "</text>\n";
    std::snprintf(label, sizeof label, "%.4g", fy);
    os << "<line x1='" << ml - 5 << "' y1='" << py(fy) << "' x2='" << ml << "' y2='" << py(fy)
       << "' stroke='black'/>\n";
    os << "<text x='" << ml - 8 << "' y='" << py(fy) + 4 << "' text-anchor='end'>" << label
       << "</text>\n";
    os << "<line x1='" << ml << "' y1='" << py(fy) << "' x2='" << ml + pw << "' y2='" << py(fy)
       << "' stroke='#dddddd'/>\n";
  }
  os << "<text x='" << ml + pw / 2 << "' y='" << height - 12 << "' text-anchor='middle'>"
     << x_label << "</text>\n";
  os << "<text x='18' y='" << mt + ph / 2 << "' text-anchor='middle' transform='rotate(-90 18 "
     << mt + ph / 2 << ")'>" << y_label << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof kPalette / sizeof kPalette[0])];
    os << "<polyline fill='none' stroke='" << color << "' stroke-width='2' points='";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (!std::isfinite(series[s].y[i])) continue;
      os << px(series[s].x[i]) << "," << py(series[s].y[i]) << " ";
    }
    os << "'/>\n";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (!std::isfinite(series[s].y[i])) continue;
      os << "<circle cx='" << px(series[s].x[i]) << "' cy='" << py(series[s].y[i])
         << "' r='3' fill='" << color << "'/>\n";
    }
    const int ly = mt + 18 + static_cast<int>(s) * 18;
    os << "<line x1='" << ml + pw + 10 << "' y1='" << ly << "' x2='" << ml + pw + 34 << "' y2='"
       << ly << "' stroke='" << color << "' stroke-width='2'/>\n";
    os << "<text x='" << ml + pw + 40 << "' y='" << ly + 4 << "'>" << series[s].label
       << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace nftk
