#include <cmath>
#include <limits>
#include <unistd.h>

#include <doctest.h>

#include "cbcomm/plot.hpp"

using namespace cbcomm;
using namespace cbcomm::plot;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint32_t be32(const std::string& s, std::size_t off) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(s[off + i]);
  return v;
}

long count(const Canvas& c, Rgb colour) {
  long n = 0;
  for (int y = 0; y < c.height(); ++y)
    for (int x = 0; x < c.width(); ++x) n += c.at(x, y) == colour;
  return n;
}

fs::path tmp_png(const std::string& name) {
  return fs::temp_directory_path() / ("cbcomm_plot_" + std::to_string(::getpid()) + "_" + name + ".png");
}

}  // namespace

TEST_CASE("colour maps hit their anchors and clamp") {
  CHECK(diverging(0.0) == kWhite);
  const auto hot = diverging(1.0), cold = diverging(-1.0);
  CHECK(hot.r > hot.b);
  CHECK(cold.b > cold.r);
  CHECK(diverging(5.0) == hot);
  CHECK(diverging(-5.0) == cold);
  CHECK(sequential(0.0) == kWhite);
  CHECK(sequential(1.0).b > sequential(1.0).r);
  CHECK(!(palette(0) == palette(1)));
}

TEST_CASE("canvas primitives stay in bounds") {
  Canvas c(20, 10);
  CHECK(count(c, kWhite) == 200);
  c.set(-1, 3, kBlack);
  c.set(25, 3, kBlack);
  CHECK(count(c, kBlack) == 0);
  c.fill_rect(2, 2, 5, 4, kBlack);
  CHECK(c.at(3, 3) == kBlack);
  CHECK(c.at(6, 3) == kWhite);
  Canvas l(20, 10);
  l.line(0, 5, 19, 5, kBlack);
  for (int x = 0; x < 20; ++x) CHECK(l.at(x, 5) == kBlack);
  CHECK_THROWS(Canvas(0, 5));
}

TEST_CASE("text width matches what is drawn") {
  Canvas c(200, 40);
  for (const std::string s : {"", "A", "beta 0.5", "IRF (h)"}) {
    CHECK(Canvas::text_width(s, 2) == c.text(1, 1, s, kBlack, 2));
    CHECK(Canvas::text_width(s, 3) == c.text(1, 1, s, kBlack, 3));
  }
  CHECK(Canvas::text_width("ab", 2) > Canvas::text_width("a", 2));
  Canvas blank(60, 20);
  blank.text(0, 0, "hello", kBlack);
  CHECK(count(blank, kBlack) > 0);
}

TEST_CASE("png output has the right signature and size") {
  Canvas c(37, 21);
  c.fill_rect(0, 0, 10, 10, Rgb{200, 10, 10});
  const auto p = tmp_png("raw");
  c.write_png(p);
  const auto bytes = read_file(p);
  REQUIRE(bytes.size() > 33);
  CHECK(bytes.substr(0, 8) == std::string("\x89PNG\r\n\x1a\n", 8));
  CHECK(bytes.substr(12, 4) == "IHDR");
  CHECK(be32(bytes, 16) == 37);
  CHECK(be32(bytes, 20) == 21);
  c.write_png(p);
  CHECK(read_file(p) == bytes);  // deterministic
  fs::remove(p);
}

TEST_CASE("charts render without throwing and mark undefined cells") {
  LineChart lc{"irf", "h", "beta", {{"beta", {0, 1, 2}, {0.1, -0.2, 0.3}}}, Band{{0, 1, 2}, {-1, -1, -1}, {1, 1, 1}},
               true, {}};
  const auto a = render(lc);
  CHECK(a.width() == 900);
  CHECK(count(a, kWhite) < 900L * 560L);

  // Non-finite points are skipped rather than poisoning the axis range.
  lc.series[0].y[1] = kNaN;
  lc.band.reset();
  CHECK_NOTHROW(render(lc));

  Heatmap hm{"shares", {"d1", "d2"}, {"t0", "t1"}, {{kNaN, kNaN}, {kNaN, kNaN}}, true};
  const auto h = render(hm);
  CHECK(count(h, kLightGrey) > 1000);
  hm.values = {{0.2, 0.8}, {0.5, 0.5}};
  hm.diverging = false;
  CHECK(count(render(hm), kLightGrey) < count(h, kLightGrey));

  Scatter sc{"map", {0, 1, 2, 3}, {0, 1, 0, 1}, {0, 0, 1, -1}, {"a", "b"}};
  CHECK_NOTHROW(render(sc));
  Scatter empty{"empty", {}, {}, {}, {}};
  CHECK_NOTHROW(render(empty));
}
