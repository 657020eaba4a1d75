#include <gtest/gtest.h>

#include <cmath>

#include "powertrace/svg.hpp"

using namespace powertrace::svg;

namespace {

LinePlot sample_plot() {
  LinePlot p;
  p.title = "voltage & <current>";
  p.x_label = "time (s)";
  p.y_label = "V";
  p.series.push_back({"raw", {0, 1, 2, 3}, {7.1, 7.3, 7.2, 7.0}});
  p.markers.push_back({"anomaly", {2}, {7.2}});
  p.vlines = {1.5};
  p.segments.push_back({0, 1.5, 7.2});
  return p;
}

}  // namespace

TEST(Svg, DeterministicAndEscaped) {
  const auto a = render(sample_plot()), b = render(sample_plot());
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.rfind("<svg", 0), 0u);
  EXPECT_NE(a.find("&amp; &lt;current&gt;"), std::string::npos);
  EXPECT_NE(a.find("<circle"), std::string::npos);
  EXPECT_EQ(a.find("nan"), std::string::npos);
}

TEST(Svg, DegenerateInputsStillRender) {
  LinePlot p;
  p.series.push_back({"flat", {0, 1}, {5, 5}});
  EXPECT_EQ(render(p).find("nan"), std::string::npos);
  EXPECT_NE(render(LinePlot{}).find("</svg>"), std::string::npos);
}

TEST(Svg, HeatTableMarksUndefinedCells) {
  const auto s = render_heat_table("corr", {"V", "I"}, {1.0, std::nan(""), std::nan(""), 1.0});
  EXPECT_NE(s.find("n/a"), std::string::npos);
  EXPECT_NE(s.find("1.00"), std::string::npos);
}
