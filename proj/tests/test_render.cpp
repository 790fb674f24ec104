#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "trackforge/render.hpp"

using namespace trackforge;
using namespace trackforge::testing;

TEST_CASE("track colors are deterministic and distinct") {
  CHECK(track_color(3) == track_color(3));
  CHECK_FALSE(track_color(0) == track_color(1));
  CHECK_FALSE(track_color(1) == track_color(2));
}

TEST_CASE("draw_box outlines and clips") {
  Canvas c(20, 20);
  const Rgb red{255, 0, 0};
  draw_box(c, {2, 2, 6, 6, 1}, red, 1);
  CHECK(c.at(2, 2) == red);
  CHECK(c.at(7, 7) == red);
  CHECK(c.at(4, 4) == Rgb{});
  CHECK(c.at(8, 8) == Rgb{});

  Canvas d(10, 10);
  CHECK_NOTHROW(draw_box(d, {-5, -5, 100, 100, 1}, red, 2));
  CHECK_NOTHROW(draw_box(d, {50, 50, 10, 10, 1}, red, 2));
  CHECK_NOTHROW(draw_box(d, {-1e9, -1e9, 1e7, 1e7, 1}, red, 2));
}

TEST_CASE("draw_tracks and ppm round trip") {
  const Track t = constant_track(5, 0, 3, {1, 1, 4, 4, 1});
  Canvas c(8, 8, {10, 20, 30});
  draw_tracks(c, std::vector{t}, 2);
  CHECK(c.at(1, 1) == track_color(5));
  Canvas blank(8, 8, {10, 20, 30});
  draw_tracks(blank, std::vector{t}, 9);
  CHECK(blank.at(1, 1) == Rgb{10, 20, 30});

  const auto path = std::filesystem::temp_directory_path() / "trackforge_render.ppm";
  write_ppm(c, path);
  const Canvas back = read_ppm(path);
  CHECK(back.width == 8);
  CHECK(back.pixels == c.pixels);
  std::ofstream(path) << "P3\n1 1\n255\n0 0 0\n";
  CHECK_THROWS(read_ppm(path));
  std::filesystem::remove(path);
}
