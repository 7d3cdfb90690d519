#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cbcomm/error.hpp"
#include "cbcomm/plot.hpp"

namespace cbcomm::plot {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Range {
  double lo = kNaN, hi = kNaN;
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::isfinite(lo) ? std::min(lo, v) : v;
    hi = std::isfinite(hi) ? std::max(hi, v) : v;
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-12) {
      const double pad = std::max(std::abs(lo) * 0.1, 1e-3);
      lo -= pad;
      hi += pad;
    }
  }
};

// 1-2-5 tick spacing with about `n` ticks.
std::vector<double> ticks(double lo, double hi, int n = 6) {
  const double raw = (hi - lo) / n;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step)
    out.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  return out;
}

std::string tick_label(double v) { return fmt::format("{:.4g}", v); }

// Crops labels that would not fit `max_px` at the given scale.
std::string fit(const std::string& s, int max_px, int scale) {
  const auto max_chars = static_cast<std::size_t>(std::max(1, (max_px + scale) / (4 * scale)));
  return s.size() <= max_chars ? s : s.substr(0, max_chars);
}

struct Frame {
  int left, top, right, bottom;
  double x0, x1, y0, y1;
  double px(double x) const { return left + (x - x0) / (x1 - x0) * (right - left); }
  double py(double y) const { return bottom - (y - y0) / (y1 - y0) * (bottom - top); }
};

void draw_axes(Canvas& c, const Frame& f, const std::string& x_label, const std::string& y_label,
               const std::vector<std::string>& x_tick_labels) {
  for (double t : ticks(f.y0, f.y1)) {
    const int y = static_cast<int>(std::lround(f.py(t)));
    c.line(f.left, y, f.right, y, kLightGrey);
    const auto s = tick_label(t);
    c.text(f.left - 8 - Canvas::text_width(s), y - 5, s, kBlack);
  }
  if (x_tick_labels.empty()) {
    for (double t : ticks(f.x0, f.x1, 8)) {
      const int x = static_cast<int>(std::lround(f.px(t)));
      c.line(x, f.bottom, x, f.bottom + 5, kBlack);
      const auto s = tick_label(t);
      c.text(x - Canvas::text_width(s) / 2, f.bottom + 10, s, kBlack);
    }
  } else {
    const std::size_t n = x_tick_labels.size();
    const std::size_t every = std::max<std::size_t>(1, n / 8);
    for (std::size_t i = 0; i < n; i += every) {
      const int x = static_cast<int>(std::lround(f.px(double(i))));
      c.line(x, f.bottom, x, f.bottom + 5, kBlack);
      c.text(x - Canvas::text_width(x_tick_labels[i]) / 2, f.bottom + 10, x_tick_labels[i], kBlack);
    }
  }
  c.line(f.left, f.top, f.left, f.bottom, kBlack);
  c.line(f.left, f.bottom, f.right, f.bottom, kBlack);
  if (!x_label.empty())
    c.text((f.left + f.right - Canvas::text_width(x_label)) / 2, f.bottom + 32, x_label, kBlack);
  if (!y_label.empty()) c.text_vertical(8, (f.top + f.bottom + Canvas::text_width(y_label)) / 2, y_label, kBlack);
}

void draw_title(Canvas& c, const std::string& title) {
  const auto t = fit(title, c.width() - 20, 3);
  c.text((c.width() - Canvas::text_width(t, 3)) / 2, 10, t, kBlack, 3);
}

}  // namespace

Canvas render(const LineChart& chart, int width, int height) {
  Canvas c(width, height);
  const bool legend = chart.series.size() > 1;
  Frame f{90, 45, width - (legend ? 210 : 25), height - 60, 0, 0, 0, 0};
  Range rx, ry;
  for (const auto& s : chart.series) {
    if (s.x.size() != s.y.size()) throw ParameterError(fmt::format("series '{}' has mismatched x and y", s.label));
    for (double v : s.x) rx.add(v);
    for (double v : s.y) ry.add(v);
  }
  if (chart.band) {
    const auto& b = *chart.band;
    if (b.x.size() != b.low.size() || b.x.size() != b.high.size()) throw ParameterError("band has mismatched sizes");
    for (double v : b.low) ry.add(v);
    for (double v : b.high) ry.add(v);
    for (double v : b.x) rx.add(v);
  }
  if (chart.zero_line) ry.add(0.0);
  rx.finish();
  ry.finish();
  const double pad = (ry.hi - ry.lo) * 0.05;
  f.x0 = rx.lo, f.x1 = rx.hi, f.y0 = ry.lo - pad, f.y1 = ry.hi + pad;

  draw_title(c, chart.title);
  draw_axes(c, f, chart.x_label, chart.y_label, chart.x_tick_labels);
  if (chart.band) {
    const auto& b = *chart.band;
    const Rgb shade{198, 219, 239};
    for (std::size_t i = 0; i + 1 < b.x.size(); ++i) {
      if (!(std::isfinite(b.low[i]) && std::isfinite(b.low[i + 1]) && std::isfinite(b.high[i]) &&
            std::isfinite(b.high[i + 1])))
        continue;
      const int xa = static_cast<int>(std::lround(f.px(b.x[i]))), xb = static_cast<int>(std::lround(f.px(b.x[i + 1])));
      for (int x = xa; x <= xb; ++x) {
        const double t = xb == xa ? 0.0 : double(x - xa) / (xb - xa);
        const double lo = b.low[i] + (b.low[i + 1] - b.low[i]) * t;
        const double hi = b.high[i] + (b.high[i + 1] - b.high[i]) * t;
        c.line(x, f.py(hi), x, f.py(lo), shade);
      }
    }
  }
  if (chart.zero_line) c.line(f.left, f.py(0), f.right, f.py(0), kGrey, 1);
  for (std::size_t s = 0; s < chart.series.size(); ++s) {
    const auto& ser = chart.series[s];
    const Rgb col = chart.series.size() == 1 ? Rgb{8, 48, 107} : palette(s);
    for (std::size_t i = 0; i + 1 < ser.x.size(); ++i)
      c.line(f.px(ser.x[i]), f.py(ser.y[i]), f.px(ser.x[i + 1]), f.py(ser.y[i + 1]), col, 2);
    if (ser.x.size() == 1) c.dot(f.px(ser.x[0]), f.py(ser.y[0]), 3, col);
    if (legend) {
      const int ly = f.top + 18 * static_cast<int>(s);
      c.fill_rect(f.right + 15, ly + 2, f.right + 30, ly + 8, col);
      c.text(f.right + 36, ly, fit(ser.label, width - f.right - 40, 2), kBlack);
    }
  }
  return c;
}

Canvas render(const Heatmap& map, int width, int height) {
  const std::size_t rows = map.row_labels.size(), cols = map.col_labels.size();
  if (map.values.size() != rows) throw ParameterError("heatmap rows do not match labels");
  for (const auto& r : map.values)
    if (r.size() != cols) throw ParameterError("heatmap columns do not match labels");
  Canvas c(width, height);
  draw_title(c, map.title);
  const int left = 100, top = 45, right = width - 90;
  const int bottom = height - 140;
  if (rows == 0 || cols == 0) {
    c.text(left, top + 20, "NO DATA", kBlack);
    return c;
  }
  double hi = 0;
  for (const auto& r : map.values)
    for (double v : r)
      if (std::isfinite(v)) hi = std::max(hi, std::abs(v));
  if (hi == 0) hi = 1;
  const double cw = double(right - left) / cols, ch = double(bottom - top) / rows;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = map.values[i][j];
      const Rgb col = map.diverging ? diverging(v) : sequential(v / hi);
      c.fill_rect(static_cast<int>(left + j * cw), static_cast<int>(top + i * ch),
                  static_cast<int>(left + (j + 1) * cw) - 1, static_cast<int>(top + (i + 1) * ch) - 1, col);
    }
  const std::size_t row_every = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(14.0 / ch)));
  for (std::size_t i = 0; i < rows; i += row_every)
    c.text(4, static_cast<int>(top + (i + 0.5) * ch) - 5, fit(map.row_labels[i], left - 8, 2), kBlack);
  for (std::size_t j = 0; j < cols; ++j)
    c.text_vertical(static_cast<int>(left + (j + 0.5) * cw) - 5, height - 4,
                    fit(map.col_labels[j], 130, 2), kBlack);
  // colour bar
  const int bx = right + 20;
  for (int y = top; y <= bottom; ++y) {
    const double t = 1.0 - double(y - top) / (bottom - top);
    c.line(bx, y, bx + 18, y, map.diverging ? diverging(2 * t - 1) : sequential(t));
  }
  c.text(bx, top - 14, tick_label(map.diverging ? 1.0 : hi), kBlack);
  c.text(bx, bottom + 4, tick_label(map.diverging ? -1.0 : 0.0), kBlack);
  return c;
}

Canvas render(const Scatter& s, int width, int height) {
  if (s.x.size() != s.y.size() || s.x.size() != s.group.size()) throw ParameterError("scatter inputs differ in length");
  Canvas c(width, height);
  Range rx, ry;
  for (double v : s.x) rx.add(v);
  for (double v : s.y) ry.add(v);
  rx.finish();
  ry.finish();
  const int legend_w = s.group_labels.empty() ? 25 : 210;
  Frame f{70, 45, width - legend_w, height - 50, rx.lo, rx.hi, ry.lo, ry.hi};
  draw_title(c, s.title);
  draw_axes(c, f, "", "", {});
  // outliers first so topics draw on top
  for (int pass = 0; pass < 2; ++pass)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const bool outlier = s.group[i] < 0;
      if (outlier != (pass == 0)) continue;
      c.dot(f.px(s.x[i]), f.py(s.y[i]), 2, outlier ? kLightGrey : palette(static_cast<std::size_t>(s.group[i])));
    }
  for (std::size_t g = 0; g < s.group_labels.size(); ++g) {
    const int ly = f.top + 18 * static_cast<int>(g);
    c.fill_rect(f.right + 15, ly + 2, f.right + 30, ly + 8, palette(g));
    c.text(f.right + 36, ly, fit(s.group_labels[g], width - f.right - 40, 2), kBlack);
  }
  return c;
}

}  // namespace cbcomm::plot
