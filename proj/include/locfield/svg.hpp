#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace locfield {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

/// Axes, tick labels, one polyline per series and a legend. Non-finite points
/// break the polyline.
std::string svg_line_plot(const std::vector<PlotSeries>& series, const std::string& title,
                          const std::string& x_label, const std::string& y_label);

/// Pixel grid of values[ix + nx * iy] over [x0, x1] x [y0, y1], blue to red;
/// non-finite cells are gray.
std::string svg_heat_grid(const Eigen::VectorXd& values, int nx, int ny, double x0, double x1,
                          double y0, double y1, const std::string& title);

}  // namespace locfield
