#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace doral {

// Shared numeric formatting for CSV cells and chart data attributes, so the
// render-source consistency check can compare strings byte for byte.
inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

struct PlotSeries {
  std::string label;
  std::string color;  // #rrggbb
  std::vector<double> y;  // x is the sample index (decision round)
};

namespace plot_detail {

constexpr int kWidth = 960;
constexpr int kHeight = 600;
constexpr int kLeft = 80;
constexpr int kRight = 930;
constexpr int kTop = 50;
constexpr int kBottom = 540;
constexpr std::size_t kMaxPoints = 1500;

inline std::size_t stride_for(std::size_t len) {
  return len <= kMaxPoints ? 1 : (len + kMaxPoints - 1) / kMaxPoints;
}

// sampled indices: every stride-th point plus the final one
inline std::vector<std::size_t> sample_indices(std::size_t len) {
  std::vector<std::size_t> idx;
  if (len == 0) return idx;
  const std::size_t stride = stride_for(len);
  for (std::size_t i = 0; i < len; i += stride) idx.push_back(i);
  if (idx.back() != len - 1) idx.push_back(len - 1);
  return idx;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace plot_detail

// Cumulative-value-vs-round line chart. Every polyline carries data-series,
// data-x and data-y attributes holding exactly the plotted samples.
inline std::string render_svg_chart(const std::string& title,
                                    const std::string& y_label,
                                    const std::vector<PlotSeries>& series) {
  namespace pd = plot_detail;
  std::size_t max_len = 0;
  double y_max = 0.0;
  for (const auto& s : series) {
    max_len = std::max(max_len, s.y.size());
    for (double v : s.y)
      if (std::isfinite(v)) y_max = std::max(y_max, v);
  }
  if (max_len < 2) max_len = 2;
  if (y_max <= 0.0) y_max = 1.0;
  y_max *= 1.05;

  const double x_span = static_cast<double>(max_len - 1);
  auto sx = [&](double i) {
    return pd::kLeft + (pd::kRight - pd::kLeft) * (i / x_span);
  };
  auto sy = [&](double v) {
    return pd::kBottom - (pd::kBottom - pd::kTop) * (v / y_max);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"600\" "
         "viewBox=\"0 0 960 600\">\n";
  svg += "<rect width=\"960\" height=\"600\" fill=\"white\"/>\n";
  svg += "<text x=\"480\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"18\">" + title + "</text>\n";

  // gridlines and tick labels
  for (int k = 0; k <= 5; ++k) {
    const double fx = static_cast<double>(k) / 5.0;
    const double gx = pd::kLeft + (pd::kRight - pd::kLeft) * fx;
    const double gy = pd::kBottom - (pd::kBottom - pd::kTop) * fx;
    char line[256];
    std::snprintf(line, sizeof(line),
                  "<line x1=\"%.1f\" y1=\"%d\" x2=\"%.1f\" y2=\"%d\" "
                  "stroke=\"#dddddd\"/>\n",
                  gx, pd::kTop, gx, pd::kBottom);
    svg += line;
    std::snprintf(line, sizeof(line),
                  "<line x1=\"%d\" y1=\"%.1f\" x2=\"%d\" y2=\"%.1f\" "
                  "stroke=\"#dddddd\"/>\n",
                  pd::kLeft, gy, pd::kRight, gy);
    svg += line;
    std::snprintf(line, sizeof(line),
                  "<text x=\"%.1f\" y=\"%d\" text-anchor=\"middle\" "
                  "font-family=\"sans-serif\" font-size=\"12\">%s</text>\n",
                  gx, pd::kBottom + 20, pd::tick_label(fx * x_span).c_str());
    svg += line;
    std::snprintf(line, sizeof(line),
                  "<text x=\"%d\" y=\"%.1f\" text-anchor=\"end\" "
                  "font-family=\"sans-serif\" font-size=\"12\">%s</text>\n",
                  pd::kLeft - 8, gy + 4, pd::tick_label(fx * y_max).c_str());
    svg += line;
  }

  char axis[256];
  std::snprintf(axis, sizeof(axis),
                "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"none\" "
                "stroke=\"black\"/>\n",
                pd::kLeft, pd::kTop, pd::kRight - pd::kLeft, pd::kBottom - pd::kTop);
  svg += axis;
  svg += "<text x=\"505\" y=\"585\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">round</text>\n";
  svg += "<text x=\"22\" y=\"295\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\" transform=\"rotate(-90 22 295)\">" + y_label + "</text>\n";

  for (const auto& s : series) {
    const auto idx = plot_detail::sample_indices(s.y.size());
    std::string points, xs, ys;
    for (std::size_t i : idx) {
      char pt[64];
      std::snprintf(pt, sizeof(pt), "%.2f,%.2f ", sx(static_cast<double>(i)),
                    sy(s.y[i]));
      points += pt;
      if (!xs.empty()) xs += ' ';
      xs += std::to_string(i);
      if (!ys.empty()) ys += ' ';
      ys += format_value(s.y[i]);
    }
    if (!points.empty()) points.pop_back();
    svg += "<polyline fill=\"none\" stroke=\"" + s.color +
           "\" stroke-width=\"1.5\" data-series=\"" + s.label + "\" data-x=\"" + xs +
           "\" data-y=\"" + ys + "\" points=\"" + points + "\"/>\n";
  }

  // legend, top-left inside the plot area
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double ly = pd::kTop + 18.0 + 18.0 * static_cast<double>(k);
    char line[256];
    std::snprintf(line, sizeof(line),
                  "<line x1=\"%d\" y1=\"%.1f\" x2=\"%d\" y2=\"%.1f\" stroke=\"%s\" "
                  "stroke-width=\"2\"/>\n",
                  pd::kLeft + 12, ly, pd::kLeft + 40, ly, series[k].color.c_str());
    svg += line;
    std::snprintf(line, sizeof(line),
                  "<text x=\"%d\" y=\"%.1f\" font-family=\"sans-serif\" "
                  "font-size=\"13\">%s</text>\n",
                  pd::kLeft + 46, ly + 4, series[k].label.c_str());
    svg += line;
  }

  svg += "</svg>\n";
  return svg;
}

namespace plot_detail {

struct Rgb {
  unsigned char r = 0, g = 0, b = 0;
};

inline Rgb parse_color(const std::string& hex) {
  Rgb c;
  if (hex.size() == 7 && hex[0] == '#') {
    c.r = static_cast<unsigned char>(std::strtol(hex.substr(1, 2).c_str(), nullptr, 16));
    c.g = static_cast<unsigned char>(std::strtol(hex.substr(3, 2).c_str(), nullptr, 16));
    c.b = static_cast<unsigned char>(std::strtol(hex.substr(5, 2).c_str(), nullptr, 16));
  }
  return c;
}

class Raster {
 public:
  Raster(int w, int h) : w_(w), h_(h), px_(static_cast<std::size_t>(w * h * 3), 255) {}

  void set(int x, int y, Rgb c) {
    if (x < 0 || x >= w_ || y < 0 || y >= h_) return;
    const std::size_t at = 3 * (static_cast<std::size_t>(y) * w_ + x);
    px_[at] = c.r;
    px_[at + 1] = c.g;
    px_[at + 2] = c.b;
  }

  void line(int x0, int y0, int x1, int y1, Rgb c) {
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int step_x = x0 < x1 ? 1 : -1, step_y = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
      set(x0, y0, c);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += step_x;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += step_y;
      }
    }
  }

  void write_ppm(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "P6\n" << w_ << " " << h_ << "\n255\n";
    out.write(reinterpret_cast<const char*>(px_.data()),
              static_cast<std::streamsize>(px_.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
  }

 private:
  int w_, h_;
  std::vector<unsigned char> px_;
};

}  // namespace plot_detail

// Raster fallback for environments without an SVG viewer: same layout, no text.
inline void write_ppm_chart(const std::string& path,
                            const std::vector<PlotSeries>& series) {
  namespace pd = plot_detail;
  pd::Raster img(pd::kWidth, pd::kHeight);
  std::size_t max_len = 0;
  double y_max = 0.0;
  for (const auto& s : series) {
    max_len = std::max(max_len, s.y.size());
    for (double v : s.y)
      if (std::isfinite(v)) y_max = std::max(y_max, v);
  }
  if (max_len < 2) max_len = 2;
  if (y_max <= 0.0) y_max = 1.0;
  y_max *= 1.05;

  const pd::Rgb black{0, 0, 0};
  img.line(pd::kLeft, pd::kTop, pd::kRight, pd::kTop, black);
  img.line(pd::kLeft, pd::kBottom, pd::kRight, pd::kBottom, black);
  img.line(pd::kLeft, pd::kTop, pd::kLeft, pd::kBottom, black);
  img.line(pd::kRight, pd::kTop, pd::kRight, pd::kBottom, black);

  const double x_span = static_cast<double>(max_len - 1);
  for (const auto& s : series) {
    const pd::Rgb color = pd::parse_color(s.color);
    const auto idx = pd::sample_indices(s.y.size());
    int px = 0, py = 0;
    bool first = true;
    for (std::size_t i : idx) {
      const int x = pd::kLeft + static_cast<int>(
          std::lround((pd::kRight - pd::kLeft) * (static_cast<double>(i) / x_span)));
      const int y = pd::kBottom - static_cast<int>(
          std::lround((pd::kBottom - pd::kTop) * (s.y[i] / y_max)));
      if (!first) img.line(px, py, x, y, color);
      px = x;
      py = y;
      first = false;
    }
  }
  img.write_ppm(path);
}

}  // namespace doral
