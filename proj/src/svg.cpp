#include "locfield/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "locfield/core.hpp"

namespace locfield {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 150;
constexpr double kTop = 40;
constexpr double kBottom = 50;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12 * std::max(1.0, std::fabs(hi))) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

void header(std::ostringstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(title) << "</text>\n";
}

void axes(std::ostringstream& out, const Range& xr, const Range& yr, const std::string& xl,
          const std::string& yl) {
  const double x1 = kWidth - kRight;
  const double y1 = kHeight - kBottom;
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << x1 - kLeft
      << "\" height=\"" << y1 - kTop << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double f = i / 4.0;
    const double px = kLeft + f * (x1 - kLeft);
    const double py = y1 - f * (y1 - kTop);
    out << "<text x=\"" << px << "\" y=\"" << y1 + 15 << "\" text-anchor=\"middle\">"
        << num(xr.lo + f * (xr.hi - xr.lo)) << "</text>\n";
    out << "<text x=\"" << kLeft - 5 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">"
        << num(yr.lo + f * (yr.hi - yr.lo)) << "</text>\n";
  }
  out << "<text x=\"" << (kLeft + x1) / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\">" << escape(xl) << "</text>\n";
  out << "<text x=\"15\" y=\"" << (kTop + y1) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << (kTop + y1) / 2 << ")\">" << escape(yl) << "</text>\n";
}

}  // namespace

std::string svg_line_plot(const std::vector<PlotSeries>& series, const std::string& title,
                          const std::string& x_label, const std::string& y_label) {
  Range xr;
  Range yr;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw ConfigError("plot series '" + s.label + "': x and y differ in length");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
        xr.add(s.x[i]);
        yr.add(s.y[i]);
      }
    }
  }
  xr.finish();
  yr.finish();
  std::ostringstream out;
  header(out, title);
  axes(out, xr, yr, x_label, y_label);
  const double x1 = kWidth - kRight;
  const double y1 = kHeight - kBottom;
  auto px = [&](double v) { return kLeft + (v - xr.lo) / (xr.hi - xr.lo) * (x1 - kLeft); };
  auto py = [&](double v) { return y1 - (v - yr.lo) / (yr.hi - yr.lo) * (y1 - kTop); };
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::string points;
    auto flush = [&] {
      if (points.empty()) return;
      out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
          << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"" << points << "\"/>\n";
      points.clear();
    };
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        flush();
        continue;
      }
      points += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
    }
    flush();
    const double ly = kTop + 15.0 + 18.0 * static_cast<double>(k);
    out << "<line x1=\"" << x1 + 10 << "\" y1=\"" << ly << "\" x2=\"" << x1 + 35 << "\" y2=\"" << ly
        << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
        << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>\n";
    out << "<text x=\"" << x1 + 40 << "\" y=\"" << ly + 4 << "\">" << escape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string svg_heat_grid(const Eigen::VectorXd& values, int nx, int ny, double x0, double x1,
                          double y0, double y1, const std::string& title) {
  if (nx < 1 || ny < 1 || values.size() != static_cast<Eigen::Index>(nx) * ny) {
    throw ConfigError("heat grid shape does not match the value count");
  }
  Range vr;
  for (Eigen::Index i = 0; i < values.size(); ++i) vr.add(values(i));
  vr.finish();
  Range xr{x0, x1};
  Range yr{y0, y1};
  std::ostringstream out;
  header(out, title);
  const double right = kWidth - kRight;
  const double bottom = kHeight - kBottom;
  const double cw = (right - kLeft) / nx;
  const double ch = (bottom - kTop) / ny;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const double v = values(ix + nx * iy);
      std::string fill = "#bbbbbb";
      if (std::isfinite(v)) {
        const double f = (v - vr.lo) / (vr.hi - vr.lo);
        char buf[8];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(255 * f), 40,
                      static_cast<int>(255 * (1 - f)));
        fill = buf;
      }
      out << "<rect x=\"" << num(kLeft + ix * cw) << "\" y=\"" << num(bottom - (iy + 1) * ch)
          << "\" width=\"" << num(cw + 0.5) << "\" height=\"" << num(ch + 0.5) << "\" fill=\"" << fill
          << "\"/>\n";
    }
  }
  axes(out, xr, yr, "x", "y");
  out << "<text x=\"" << right + 10 << "\" y=\"" << kTop + 15 << "\">max " << num(vr.hi) << "</text>\n";
  out << "<text x=\"" << right + 10 << "\" y=\"" << kTop + 33 << "\">min " << num(vr.lo) << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace locfield
