#include "regvar/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "regvar/errors.hpp"

namespace regvar {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

}  // namespace

void emit_svg(const std::string& path, const std::vector<SvgCurve>& curves,
              const SvgOptions& opts) {
  if (curves.empty()) throw data_error("plot needs at least one curve");
  if (opts.width < 100 || opts.height < 100) throw config_error("plot size too small");

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const SvgCurve& c : curves) {
    if (c.x.size() != c.y.size()) throw data_error("curve '" + c.label + "' has mismatched x/y");
    if (c.x.empty()) throw data_error("curve '" + c.label + "' is empty");
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      if (!std::isfinite(c.x[i]) || !std::isfinite(c.y[i]))
        throw data_error("curve '" + c.label + "' has non-finite points");
      if (opts.log_x && !(c.x[i] > 0.0))
        throw data_error("log-scale x needs positive values");
      if (opts.log_y && !(c.y[i] > 0.0))
        throw data_error("log-scale y needs positive values");
      x_lo = std::min(x_lo, c.x[i]);
      x_hi = std::max(x_hi, c.x[i]);
      y_lo = std::min(y_lo, c.y[i]);
      y_hi = std::max(y_hi, c.y[i]);
    }
  }
  const auto tx = [&](double v) { return opts.log_x ? std::log10(v) : v; };
  const auto ty = [&](double v) { return opts.log_y ? std::log10(v) : v; };
  double ax_lo = tx(x_lo), ax_hi = tx(x_hi), ay_lo = ty(y_lo), ay_hi = ty(y_hi);
  if (ax_hi - ax_lo < 1e-12) {
    ax_lo -= 0.5;
    ax_hi += 0.5;
  }
  if (ay_hi - ay_lo < 1e-12) {
    ay_lo -= 0.5;
    ay_hi += 0.5;
  }

  const double ml = 70.0, mr = 20.0, mt = opts.title.empty() ? 20.0 : 40.0, mb = 50.0;
  const double pw = opts.width - ml - mr, ph = opts.height - mt - mb;
  const auto px = [&](double v) { return ml + (tx(v) - ax_lo) / (ax_hi - ax_lo) * pw; };
  const auto py = [&](double v) { return mt + (ay_hi - ty(v)) / (ay_hi - ay_lo) * ph; };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot open '" + path + "' for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width
      << "\" height=\"" << opts.height << "\" viewBox=\"0 0 " << opts.width << " "
      << opts.height << "\">\n";
  out << "<rect width=\"" << opts.width << "\" height=\"" << opts.height
      << "\" fill=\"white\"/>\n";
  if (!opts.title.empty())
    out << "<text x=\"" << num(ml + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << escape(opts.title)
        << "</text>\n";

  // axes
  out << "<line x1=\"" << num(ml) << "\" y1=\"" << num(mt + ph) << "\" x2=\""
      << num(ml + pw) << "\" y2=\"" << num(mt + ph) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << num(ml) << "\" y1=\"" << num(mt) << "\" x2=\"" << num(ml)
      << "\" y2=\"" << num(mt + ph) << "\" stroke=\"black\"/>\n";

  constexpr int kTicks = 5;
  for (int i = 0; i < kTicks; ++i) {
    const double fa = static_cast<double>(i) / (kTicks - 1);
    const double axv = ax_lo + fa * (ax_hi - ax_lo);
    const double xv = opts.log_x ? std::pow(10.0, axv) : axv;
    const double xp = ml + fa * pw;
    out << "<line x1=\"" << num(xp) << "\" y1=\"" << num(mt + ph) << "\" x2=\"" << num(xp)
        << "\" y2=\"" << num(mt + ph + 5) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(xp) << "\" y=\"" << num(mt + ph + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick_label(xv) << "</text>\n";
    const double ayv = ay_lo + fa * (ay_hi - ay_lo);
    const double yv = opts.log_y ? std::pow(10.0, ayv) : ayv;
    const double yp = mt + (1.0 - fa) * ph;
    out << "<line x1=\"" << num(ml - 5) << "\" y1=\"" << num(yp) << "\" x2=\"" << num(ml)
        << "\" y2=\"" << num(yp) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(ml - 8) << "\" y=\"" << num(yp + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << tick_label(yv) << "</text>\n";
  }
  if (!opts.x_label.empty())
    out << "<text x=\"" << num(ml + pw / 2) << "\" y=\"" << num(mt + ph + 38)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << escape(opts.x_label) << "</text>\n";
  if (!opts.y_label.empty())
    out << "<text x=\"16\" y=\"" << num(mt + ph / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 16 " << num(mt + ph / 2) << ")\">"
        << escape(opts.y_label) << "</text>\n";

  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const SvgCurve& c = curves[ci];
    out << "<polyline fill=\"none\" stroke=\"" << kPalette[ci % kPaletteSize]
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < c.x.size(); ++i)
      out << (i ? " " : "") << num(px(c.x[i])) << "," << num(py(c.y[i]));
    out << "\"/>\n";
  }

  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const double ly = mt + 14.0 + 16.0 * static_cast<double>(ci);
    out << "<rect x=\"" << num(ml + pw - 130) << "\" y=\"" << num(ly - 9)
        << "\" width=\"12\" height=\"4\" fill=\"" << kPalette[ci % kPaletteSize]
        << "\"/>\n";
    out << "<text x=\"" << num(ml + pw - 112) << "\" y=\"" << num(ly)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(curves[ci].label)
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace regvar
