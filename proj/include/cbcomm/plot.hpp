#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cbcomm/io.hpp"

namespace cbcomm::plot {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kBlack{0, 0, 0};
inline constexpr Rgb kGrey{150, 150, 150};
inline constexpr Rgb kLightGrey{225, 225, 225};

// Categorical palette, cycled.
Rgb palette(std::size_t i);
// Blue (-1) through white (0) to red (+1); clamps outside [-1, 1].
Rgb diverging(double v);
// White (0) to dark blue (1).
Rgb sequential(double v);

// RGB raster with a top-left origin.
class Canvas {
 public:
  Canvas(int width, int height, Rgb background = kWhite);

  int width() const { return w_; }
  int height() const { return h_; }
  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);  // ignores out-of-range pixels
  void fill_rect(int x0, int y0, int x1, int y1, Rgb c);
  void line(double x0, double y0, double x1, double y1, Rgb c, int thickness = 1);
  void dot(double x, double y, int radius, Rgb c);
  // 3x5 bitmap font scaled by `scale`; lower case renders as upper case and
  // unknown characters as blanks. Returns the drawn width in pixels.
  int text(int x, int y, const std::string& s, Rgb c, int scale = 2);
  static int text_width(const std::string& s, int scale = 2);
  void text_vertical(int x, int y, const std::string& s, Rgb c, int scale = 2);  // bottom to top

  void write_png(const fs::path& path) const;  // atomic

 private:
  int w_, h_;
  std::vector<std::uint8_t> px_;
};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Band {
  std::vector<double> x;
  std::vector<double> low;
  std::vector<double> high;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::optional<Band> band;
  bool zero_line = false;
  std::vector<std::string> x_tick_labels;  // optional, placed at x = 0, 1, ...
};

Canvas render(const LineChart& chart, int width = 900, int height = 560);

struct Heatmap {
  std::string title;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<double>> values;  // row-major, NaN cells drawn light grey
  bool diverging = false;                   // else sequential on [0, max]
};

Canvas render(const Heatmap& map, int width = 900, int height = 640);

struct Scatter {
  std::string title;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<int> group;  // -1 drawn grey
  std::vector<std::string> group_labels;
};

Canvas render(const Scatter& s, int width = 800, int height = 700);

}  // namespace cbcomm::plot
