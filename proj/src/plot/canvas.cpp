#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include <fmt/format.h>
#include <png.h>

#include "cbcomm/error.hpp"
#include "cbcomm/plot.hpp"

namespace cbcomm::plot {

namespace {

using Glyph = std::array<const char*, 5>;

const std::map<char, Glyph>& font() {
  static const std::map<char, Glyph> f{
      {'0', {"111", "101", "101", "101", "111"}}, {'1', {"010", "110", "010", "010", "111"}},
      {'2', {"111", "001", "111", "100", "111"}}, {'3', {"111", "001", "111", "001", "111"}},
      {'4', {"101", "101", "111", "001", "001"}}, {'5', {"111", "100", "111", "001", "111"}},
      {'6', {"111", "100", "111", "101", "111"}}, {'7', {"111", "001", "010", "010", "010"}},
      {'8', {"111", "101", "111", "101", "111"}}, {'9', {"111", "101", "111", "001", "111"}},
      {'A', {"010", "101", "111", "101", "101"}}, {'B', {"110", "101", "110", "101", "110"}},
      {'C', {"011", "100", "100", "100", "011"}}, {'D', {"110", "101", "101", "101", "110"}},
      {'E', {"111", "100", "110", "100", "111"}}, {'F', {"111", "100", "110", "100", "100"}},
      {'G', {"011", "100", "101", "101", "011"}}, {'H', {"101", "101", "111", "101", "101"}},
      {'I', {"111", "010", "010", "010", "111"}}, {'J', {"001", "001", "001", "101", "010"}},
      {'K', {"101", "101", "110", "101", "101"}}, {'L', {"100", "100", "100", "100", "111"}},
      {'M', {"101", "111", "111", "101", "101"}}, {'N', {"110", "101", "101", "101", "101"}},
      {'O', {"010", "101", "101", "101", "010"}}, {'P', {"110", "101", "110", "100", "100"}},
      {'Q', {"010", "101", "101", "110", "011"}}, {'R', {"110", "101", "110", "101", "101"}},
      {'S', {"011", "100", "010", "001", "110"}}, {'T', {"111", "010", "010", "010", "010"}},
      {'U', {"101", "101", "101", "101", "111"}}, {'V', {"101", "101", "101", "101", "010"}},
      {'W', {"101", "101", "111", "111", "101"}}, {'X', {"101", "101", "010", "101", "101"}},
      {'Y', {"101", "101", "010", "010", "010"}}, {'Z', {"111", "001", "010", "100", "111"}},
      {'-', {"000", "000", "111", "000", "000"}}, {'.', {"000", "000", "000", "000", "010"}},
      {',', {"000", "000", "000", "010", "100"}}, {':', {"000", "010", "000", "010", "000"}},
      {'_', {"000", "000", "000", "000", "111"}}, {'+', {"000", "010", "111", "010", "000"}},
      {'(', {"001", "010", "010", "010", "001"}}, {')', {"100", "010", "010", "010", "100"}},
      {'/', {"001", "001", "010", "100", "100"}}, {'=', {"000", "111", "000", "111", "000"}},
      {'%', {"101", "001", "010", "100", "101"}}, {'<', {"001", "010", "100", "010", "001"}},
      {'>', {"100", "010", "001", "010", "100"}}};
  return f;
}

const Glyph* glyph(char c) {
  const auto& f = font();
  const auto it = f.find(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return it == f.end() ? nullptr : &it->second;
}

Rgb lerp(Rgb a, Rgb b, double t) {
  auto mix = [t](std::uint8_t x, std::uint8_t y) {
    return static_cast<std::uint8_t>(std::lround(x + (double(y) - double(x)) * t));
  };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

}  // namespace

Rgb palette(std::size_t i) {
  static const Rgb p[] = {{31, 119, 180}, {255, 127, 14}, {44, 160, 44},  {214, 39, 40},
                          {148, 103, 189}, {140, 86, 75}, {227, 119, 194}, {188, 189, 34},
                          {23, 190, 207}, {127, 127, 127}};
  return p[i % std::size(p)];
}

Rgb diverging(double v) {
  if (!std::isfinite(v)) return kLightGrey;
  v = std::clamp(v, -1.0, 1.0);
  return v < 0 ? lerp(kWhite, Rgb{33, 102, 172}, -v) : lerp(kWhite, Rgb{178, 24, 43}, v);
}

Rgb sequential(double v) {
  if (!std::isfinite(v)) return kLightGrey;
  return lerp(kWhite, Rgb{8, 48, 107}, std::clamp(v, 0.0, 1.0));
}

Canvas::Canvas(int width, int height, Rgb background) : w_(width), h_(height) {
  if (width <= 0 || height <= 0) throw ParameterError("canvas needs positive dimensions");
  px_.resize(static_cast<std::size_t>(w_) * h_ * 3);
  for (std::size_t i = 0; i < px_.size(); i += 3) {
    px_[i] = background.r;
    px_[i + 1] = background.g;
    px_[i + 2] = background.b;
  }
}

Rgb Canvas::at(int x, int y) const {
  if (x < 0 || y < 0 || x >= w_ || y >= h_) throw ParameterError("pixel outside canvas");
  const auto i = (static_cast<std::size_t>(y) * w_ + x) * 3;
  return {px_[i], px_[i + 1], px_[i + 2]};
}

void Canvas::set(int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
  const auto i = (static_cast<std::size_t>(y) * w_ + x) * 3;
  px_[i] = c.r;
  px_[i + 1] = c.g;
  px_[i + 2] = c.b;
}

void Canvas::fill_rect(int x0, int y0, int x1, int y1, Rgb c) {
  if (x0 > x1) std::swap(x0, x1);
  if (y0 > y1) std::swap(y0, y1);
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, w_ - 1);
  y1 = std::min(y1, h_ - 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) set(x, y, c);
}

void Canvas::line(double x0, double y0, double x1, double y1, Rgb c, int thickness) {
  if (!(std::isfinite(x0) && std::isfinite(y0) && std::isfinite(x1) && std::isfinite(y1))) return;
  const double len = std::max(std::abs(x1 - x0), std::abs(y1 - y0));
  const int steps = std::max(1, static_cast<int>(std::ceil(len)));
  const int r = thickness / 2;
  for (int s = 0; s <= steps; ++s) {
    const double t = double(s) / steps;
    const int x = static_cast<int>(std::lround(x0 + (x1 - x0) * t));
    const int y = static_cast<int>(std::lround(y0 + (y1 - y0) * t));
    fill_rect(x - r, y - r, x - r + thickness - 1, y - r + thickness - 1, c);
  }
}

void Canvas::dot(double x, double y, int radius, Rgb c) {
  if (!std::isfinite(x) || !std::isfinite(y)) return;
  const int cx = static_cast<int>(std::lround(x)), cy = static_cast<int>(std::lround(y));
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius) set(cx + dx, cy + dy, c);
}

int Canvas::text_width(const std::string& s, int scale) {
  return s.empty() ? 0 : static_cast<int>(s.size()) * 4 * scale - scale;
}

int Canvas::text(int x, int y, const std::string& s, Rgb c, int scale) {
  int pen = x;
  for (char ch : s) {
    if (const auto* g = glyph(ch))
      for (int row = 0; row < 5; ++row)
        for (int col = 0; col < 3; ++col)
          if ((*g)[row][col] == '1') fill_rect(pen + col * scale, y + row * scale, pen + (col + 1) * scale - 1,
                                               y + (row + 1) * scale - 1, c);
    pen += 4 * scale;
  }
  return text_width(s, scale);
}

void Canvas::text_vertical(int x, int y, const std::string& s, Rgb c, int scale) {
  int pen = y;
  for (char ch : s) {
    if (const auto* g = glyph(ch))
      for (int row = 0; row < 5; ++row)
        for (int col = 0; col < 3; ++col)
          if ((*g)[row][col] == '1')
            // rotate 90 degrees counter-clockwise: glyph column runs upwards
            fill_rect(x + row * scale, pen - (col + 1) * scale + 1, x + (row + 1) * scale - 1, pen - col * scale, c);
    pen -= 4 * scale;
  }
}

void Canvas::write_png(const fs::path& path) const {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  std::string out;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(fmt::format("PNG encoding failed for '{}'", path.string()));
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t n) {
        static_cast<std::string*>(png_get_io_ptr(p))->append(reinterpret_cast<const char*>(data), n);
      },
      nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w_), static_cast<png_uint_32>(h_), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < h_; ++y)
    png_write_row(png, const_cast<png_bytep>(px_.data() + static_cast<std::size_t>(y) * w_ * 3));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  write_file_atomic(path, out);
}

}  // namespace cbcomm::plot
