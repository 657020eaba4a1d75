#include "powertrace/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "powertrace/format.hpp"

namespace powertrace::svg {

namespace {

constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 50;

std::string num(double v) { return format_fixed(v, 2); }

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    } else if (lo == hi) {
      lo -= 0.5;
      hi += 0.5;
    } else {
      const double pad = 0.05 * (hi - lo);
      lo -= pad;
      hi += pad;
    }
  }
};

std::string hex_channel(double v) {
  char buf[3];
  std::snprintf(buf, sizeof buf, "%02x", static_cast<int>(std::lround(std::clamp(v, 0.0, 255.0))));
  return buf;
}

std::string diverging(double v) {
  if (!std::isfinite(v)) return "#cccccc";
  const double t = std::clamp(v, -1.0, 1.0);
  const double fade = 255.0 * (1.0 - std::abs(t));
  if (t >= 0) return "#ff" + hex_channel(fade) + hex_channel(fade);
  return "#" + hex_channel(fade) + hex_channel(fade) + "ff";
}

}  // namespace

std::string escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
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

std::string render(const LinePlot& plot) {
  Range xr;
  Range yr;
  for (const auto& s : plot.series) {
    for (double x : s.x) xr.add(x);
    for (double y : s.y) yr.add(y);
  }
  for (const auto& m : plot.markers) {
    for (double x : m.x) xr.add(x);
    for (double y : m.y) yr.add(y);
  }
  for (const auto& seg : plot.segments) yr.add(seg.y);
  xr.finish();
  yr.finish();

  const double pw = plot.width - kMarginLeft - kMarginRight;
  const double ph = plot.height - kMarginTop - kMarginBottom;
  auto px = [&](double x) { return kMarginLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kMarginTop + (1.0 - (y - yr.lo) / (yr.hi - yr.lo)) * ph; };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(plot.width) +
       "\" height=\"" + std::to_string(plot.height) + "\" viewBox=\"0 0 " +
       std::to_string(plot.width) + " " + std::to_string(plot.height) + "\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + num(plot.width / 2.0) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" +
       escape(plot.title) + "</text>\n";
  o += "<rect x=\"" + std::to_string(kMarginLeft) + "\" y=\"" + std::to_string(kMarginTop) +
       "\" width=\"" + num(pw) + "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    o += "<text x=\"" + std::to_string(kMarginLeft - 6) + "\" y=\"" + num(py(fy) + 4) +
         "\" text-anchor=\"end\" font-size=\"11\">" + format_fixed(fy, 3) + "</text>\n";
    o += "<text x=\"" + num(px(fx)) + "\" y=\"" + std::to_string(plot.height - kMarginBottom + 16) +
         "\" text-anchor=\"middle\" font-size=\"11\">" + format_fixed(fx, 1) + "</text>\n";
  }
  o += "<text x=\"" + num(kMarginLeft + pw / 2) + "\" y=\"" + std::to_string(plot.height - 10) +
       "\" text-anchor=\"middle\" font-size=\"12\">" + escape(plot.x_label) + "</text>\n";
  o += "<text x=\"16\" y=\"" + num(kMarginTop + ph / 2) + "\" text-anchor=\"middle\" font-size=\"12\" "
       "transform=\"rotate(-90 16 " + num(kMarginTop + ph / 2) + ")\">" + escape(plot.y_label) +
       "</text>\n";

  for (double v : plot.vlines) {
    o += "<line x1=\"" + num(px(v)) + "\" y1=\"" + std::to_string(kMarginTop) + "\" x2=\"" +
         num(px(v)) + "\" y2=\"" + num(kMarginTop + ph) +
         "\" stroke=\"#2ca02c\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (const auto& s : plot.series) {
    o += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1\" points=\"";
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (i) o += ' ';
      o += num(px(s.x[i])) + "," + num(py(s.y[i]));
    }
    o += "\"/>\n";
  }
  for (const auto& seg : plot.segments) {
    o += "<line x1=\"" + num(px(seg.x0)) + "\" y1=\"" + num(py(seg.y)) + "\" x2=\"" + num(px(seg.x1)) +
         "\" y2=\"" + num(py(seg.y)) + "\" stroke=\"#ff7f0e\" stroke-width=\"2\"/>\n";
  }
  for (const auto& m : plot.markers) {
    const std::size_t n = std::min(m.x.size(), m.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      o += "<circle cx=\"" + num(px(m.x[i])) + "\" cy=\"" + num(py(m.y[i])) + "\" r=\"3\" fill=\"" +
           m.color + "\"/>\n";
    }
  }

  // Legend
  int ly = kMarginTop + 14;
  auto legend = [&](const std::string& label, const std::string& color) {
    if (label.empty()) return;
    const int lx = plot.width - kMarginRight - 150;
    o += "<rect x=\"" + std::to_string(lx) + "\" y=\"" + std::to_string(ly - 9) +
         "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n";
    o += "<text x=\"" + std::to_string(lx + 14) + "\" y=\"" + std::to_string(ly) +
         "\" font-size=\"11\">" + escape(label) + "</text>\n";
    ly += 14;
  };
  for (const auto& s : plot.series) legend(s.label, s.color);
  for (const auto& m : plot.markers) legend(m.label, m.color);
  o += "</svg>\n";
  return o;
}

std::string render_heat_table(const std::string& title, const std::vector<std::string>& labels,
                              const std::vector<double>& values, int decimals) {
  const std::size_t n = labels.size();
  constexpr int kCell = 70;
  constexpr int kHeader = 80;
  const int size = kHeader + static_cast<int>(n) * kCell + 10;
  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(size) + "\" height=\"" +
       std::to_string(size + 30) + "\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + std::to_string(size / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
       escape(title) + "</text>\n";
  const int top = 30;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = kHeader + static_cast<int>(i) * kCell + kCell / 2;
    o += "<text x=\"" + std::to_string(c) + "\" y=\"" + std::to_string(top + kHeader - 8) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + escape(labels[i]) + "</text>\n";
    o += "<text x=\"" + std::to_string(kHeader - 8) + "\" y=\"" +
         std::to_string(top + c + 4) + "\" text-anchor=\"end\" font-size=\"12\">" +
         escape(labels[i]) + "</text>\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = i * n + j < values.size() ? values[i * n + j]
                                                 : std::numeric_limits<double>::quiet_NaN();
      const int x = kHeader + static_cast<int>(j) * kCell;
      const int y = top + kHeader + static_cast<int>(i) * kCell;
      o += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) + "\" width=\"" +
           std::to_string(kCell) + "\" height=\"" + std::to_string(kCell) + "\" fill=\"" +
           diverging(v) + "\" stroke=\"white\"/>\n";
      o += "<text x=\"" + std::to_string(x + kCell / 2) + "\" y=\"" + std::to_string(y + kCell / 2 + 4) +
           "\" text-anchor=\"middle\" font-size=\"12\">" +
           (std::isfinite(v) ? format_fixed(v, decimals) : std::string("n/a")) + "</text>\n";
    }
  }
  o += "</svg>\n";
  return o;
}

}  // namespace powertrace::svg
