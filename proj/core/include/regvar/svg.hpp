#pragma once

#include <string>
#include <vector>

namespace regvar {

struct SvgCurve {
  std::string label;
  std::vector<double> x, y;
};

struct SvgOptions {
  int width = 800;
  int height = 600;
  bool log_x = false;
  bool log_y = false;
  std::string title;
  std::string x_label;
  std::string y_label;
};

// Standalone SVG with one polyline per curve, axes with ticks, and a legend.
// Output bytes depend only on the inputs (fixed-format numbers, no
// timestamps), so repeated calls are byte-identical.
void emit_svg(const std::string& path, const std::vector<SvgCurve>& curves,
              const SvgOptions& opts = SvgOptions{});

}  // namespace regvar
