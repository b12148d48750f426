// SPDX-License-Identifier: Apache-2.0
//
// nftk -- near-field array channel toolkit

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nftk {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Small self-contained SVG line plot (axes, ticks, legend). Non-finite y
/// values break the polyline.
void write_svg_lineplot(std::ostream& os, const std::string& title, const std::string& x_label,
                        const std::string& y_label, const std::vector<SvgSeries>& series);

}  // namespace nftk
