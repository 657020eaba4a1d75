#pragma once

#include <string>
#include <vector>

namespace powertrace::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
};

struct Markers {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#d62728";
};

// Horizontal segment drawn from x0 to x1 at height y (segment means).
struct Segment {
  double x0 = 0.0;
  double x1 = 0.0;
  double y = 0.0;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<Markers> markers;
  std::vector<double> vlines;
  std::vector<Segment> segments;
  int width = 800;
  int height = 400;
};

// Output depends only on the input values; coordinates are printed with fixed precision.
std::string render(const LinePlot& plot);

// Square table of values with a diverging fill (-1 blue, 0 white, 1 red). NaN cells are grey.
std::string render_heat_table(const std::string& title, const std::vector<std::string>& labels,
                              const std::vector<double>& values, int decimals = 2);

std::string escape(const std::string& text);

}  // namespace powertrace::svg
