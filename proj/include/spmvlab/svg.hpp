#pragma once

// Minimal self-contained SVG charts. Output depends only on the inputs
// (fixed-precision coordinates, no timestamps), so reports are byte-stable.

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <fmt/format.h>

namespace spmvlab::svg {

inline constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

inline const char* color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
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

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct Frame {
  double width = 640, height = 420;
  double left = 64, right = 150, top = 40, bottom = 52;
  double plot_w() const { return width - left - right; }
  double plot_h() const { return height - top - bottom; }
};

class Canvas {
 public:
  explicit Canvas(Frame f = {}) : f_(f) {
    out_ += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
        "viewBox=\"0 0 {:.0f} {:.0f}\" font-family=\"sans-serif\" font-size=\"11\">\n",
        f_.width, f_.height, f_.width, f_.height);
    out_ += fmt::format("<rect width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n", f_.width,
                        f_.height);
  }

  const Frame& frame() const { return f_; }

  void text(double x, double y, std::string_view s, std::string_view anchor = "start",
            int size = 11, double rotate = 0) {
    if (rotate != 0)
      out_ += fmt::format(
          "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"{}\" font-size=\"{}\" "
          "transform=\"rotate({:.0f} {:.2f} {:.2f})\">{}</text>\n",
          x, y, anchor, size, rotate, x, y, escape(s));
    else
      out_ += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"{}\" font-size=\"{}\">{}</text>\n",
                          x, y, anchor, size, escape(s));
  }

  void line(double x1, double y1, double x2, double y2, std::string_view stroke = "black",
            double width = 1) {
    out_ += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" "
        "stroke-width=\"{:.1f}\"/>\n",
        x1, y1, x2, y2, stroke, width);
  }

  void rect(double x, double y, double w, double h, std::string_view fill,
            std::string_view title = {}) {
    out_ += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"",
                        x, y, std::max(w, 0.0), std::max(h, 0.0), fill);
    if (title.empty())
      out_ += "/>\n";
    else
      out_ += fmt::format("><title>{}</title></rect>\n", escape(title));
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, std::string_view stroke) {
    out_ += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"";
    out_ += stroke;
    out_ += "\" points=\"";
    for (const auto& [x, y] : pts) out_ += fmt::format("{:.2f},{:.2f} ", x, y);
    out_ += "\"/>\n";
  }

  void title(std::string_view s) { text(f_.width / 2, 22, s, "middle", 14); }

  void legend(const std::vector<std::string>& names) {
    const double x = f_.width - f_.right + 12;
    for (std::size_t i = 0; i < names.size(); ++i) {
      const double y = f_.top + 10 + 16.0 * static_cast<double>(i);
      rect(x, y - 8, 10, 10, color(i));
      text(x + 15, y + 1, names[i]);
    }
  }

  std::string finish() {
    out_ += "</svg>\n";
    return std::move(out_);
  }

 private:
  Frame f_;
  std::string out_;
};

/// Axis-aligned linear scale from data to pixels.
struct Scale {
  double d0, d1, p0, p1;
  double operator()(double v) const {
    return d1 == d0 ? (p0 + p1) / 2 : p0 + (v - d0) * (p1 - p0) / (d1 - d0);
  }
};

inline std::vector<double> ticks(double lo, double hi, int n = 5) {
  std::vector<double> t;
  if (hi <= lo) return {lo};
  for (int i = 0; i <= n; ++i) t.push_back(lo + (hi - lo) * i / n);
  return t;
}

inline void axes(Canvas& c, const Scale& sx, const Scale& sy, std::string_view xlabel,
                 std::string_view ylabel) {
  const auto& f = c.frame();
  const double x0 = f.left, y0 = f.top + f.plot_h();
  c.line(x0, f.top, x0, y0);
  c.line(x0, y0, x0 + f.plot_w(), y0);
  for (double v : ticks(sx.d0, sx.d1)) {
    c.line(sx(v), y0, sx(v), y0 + 4);
    c.text(sx(v), y0 + 16, fmt::format("{:.3g}", v), "middle");
  }
  for (double v : ticks(sy.d0, sy.d1)) {
    c.line(x0 - 4, sy(v), x0, sy(v));
    c.text(x0 - 6, sy(v) + 4, fmt::format("{:.3g}", v), "end");
  }
  c.text(x0 + f.plot_w() / 2, f.height - 12, xlabel, "middle");
  c.text(16, f.top + f.plot_h() / 2, ylabel, "middle", 11, -90);
}

/// Line chart; with `step` set each series is drawn as a right-continuous
/// step function (profiles and CDFs).
inline std::string line_chart(std::string_view title, std::string_view xlabel,
                              std::string_view ylabel, const std::vector<Series>& series,
                              bool step = false, std::pair<double, double> yrange = {0, 1}) {
  Canvas c;
  const auto& f = c.frame();
  double xmin = 1e300, xmax = -1e300;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
    }
  if (xmin > xmax) xmin = 0, xmax = 1;
  const Scale sx{xmin, xmax, f.left, f.left + f.plot_w()};
  const Scale sy{yrange.first, yrange.second, f.top + f.plot_h(), f.top};
  c.title(title);
  axes(c, sx, sy, xlabel, ylabel);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < series.size(); ++i) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < series[i].points.size(); ++k) {
      const auto [x, y] = series[i].points[k];
      if (step && k > 0) pts.emplace_back(sx(x), sy(series[i].points[k - 1].second));
      pts.emplace_back(sx(x), sy(y));
    }
    c.polyline(pts, color(i));
    names.push_back(series[i].name);
  }
  c.legend(names);
  return c.finish();
}

/// Bars per category; `values[cat][layer]`. Stacked when `stacked`, else
/// grouped side by side.
inline std::string bar_chart(std::string_view title, std::string_view ylabel,
                             const std::vector<std::string>& categories,
                             const std::vector<std::string>& layers,
                             const std::vector<std::vector<double>>& values, bool stacked,
                             const std::vector<std::string>& annotations = {}) {
  Canvas c;
  const auto& f = c.frame();
  double ymax = 0;
  for (const auto& row : values) {
    double total = 0;
    for (double v : row) {
      total += v;
      ymax = std::max(ymax, v);
    }
    if (stacked) ymax = std::max(ymax, total);
  }
  if (ymax <= 0) ymax = 1;
  const Scale sy{0, ymax, f.top + f.plot_h(), f.top};
  c.title(title);
  const double x0 = f.left, y0 = f.top + f.plot_h();
  c.line(x0, f.top, x0, y0);
  c.line(x0, y0, x0 + f.plot_w(), y0);
  for (double v : ticks(0, ymax)) {
    c.line(x0 - 4, sy(v), x0, sy(v));
    c.text(x0 - 6, sy(v) + 4, fmt::format("{:.3g}", v), "end");
  }
  c.text(16, f.top + f.plot_h() / 2, ylabel, "middle", 11, -90);

  const double slot = categories.empty() ? 0 : f.plot_w() / static_cast<double>(categories.size());
  const double bar_w = slot * 0.7;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    const double left = x0 + slot * static_cast<double>(i) + slot * 0.15;
    double base = 0;
    for (std::size_t l = 0; l < layers.size() && l < values[i].size(); ++l) {
      const double v = values[i][l];
      const std::string tip = fmt::format("{} / {}: {:.4g}", categories[i], layers[l], v);
      if (stacked) {
        c.rect(left, sy(base + v), bar_w, sy(base) - sy(base + v), color(l), tip);
        base += v;
      } else {
        const double w = bar_w / static_cast<double>(layers.size());
        c.rect(left + w * static_cast<double>(l), sy(v), w, y0 - sy(v), color(l), tip);
      }
    }
    c.text(left + bar_w / 2, y0 + 14, categories[i], "middle", 10);
    if (i < annotations.size() && !annotations[i].empty())
      c.text(left + bar_w / 2, f.top - 4, annotations[i], "middle", 9);
  }
  c.legend(layers);
  return c.finish();
}

/// Grid of cells shaded by value in [0, 1], labelled with the value.
inline std::string heatmap(std::string_view title, const std::vector<std::string>& row_labels,
                           const std::vector<std::string>& col_labels,
                           const std::vector<std::vector<double>>& values) {
  Frame frame;
  frame.left = 110;
  frame.right = 30;
  frame.bottom = 90;
  Canvas c(frame);
  const auto& f = c.frame();
  c.title(title);
  const double cw = col_labels.empty() ? 0 : f.plot_w() / static_cast<double>(col_labels.size());
  const double ch = row_labels.empty() ? 0 : f.plot_h() / static_cast<double>(row_labels.size());
  for (std::size_t i = 0; i < row_labels.size(); ++i) {
    c.text(f.left - 6, f.top + ch * (static_cast<double>(i) + 0.5) + 4, row_labels[i], "end");
    for (std::size_t j = 0; j < col_labels.size(); ++j) {
      const double v = std::clamp(values[i][j], 0.0, 1.0);
      const int shade = static_cast<int>(std::lround(255 - 200 * v));
      c.rect(f.left + cw * static_cast<double>(j), f.top + ch * static_cast<double>(i), cw - 1, ch - 1,
             fmt::format("rgb({},{},255)", shade, shade));
      c.text(f.left + cw * (static_cast<double>(j) + 0.5), f.top + ch * (static_cast<double>(i) + 0.5) + 4,
             fmt::format("{:.2f}", values[i][j]), "middle", 10);
    }
  }
  for (std::size_t j = 0; j < col_labels.size(); ++j)
    c.text(f.left + cw * (static_cast<double>(j) + 0.5), f.top + f.plot_h() + 14, col_labels[j],
           "end", 10, -35);
  return c.finish();
}

}  // namespace spmvlab::svg
