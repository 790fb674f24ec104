#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "trackforge/track.hpp"

namespace trackforge {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Canvas {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;

  Canvas() = default;
  Canvas(int width, int height, Rgb fill = {})
      : width(width), height(height), pixels(static_cast<std::size_t>(width) * height, fill) {}
  Rgb& at(int px, int py) { return pixels[static_cast<std::size_t>(py) * width + px]; }
  const Rgb& at(int px, int py) const { return pixels[static_cast<std::size_t>(py) * width + px]; }
};

// Binary P6 portable pixmap, maxval 255.
void write_ppm(const Canvas& canvas, const std::filesystem::path& path);
Canvas read_ppm(const std::filesystem::path& path);

// Deterministic color per track id.
Rgb track_color(int track_id) noexcept;

// Outline of `b` (rounded to pixels), clipped to the canvas.
void draw_box(Canvas& canvas, const Box& b, Rgb color, int thickness = 2);

// Draws every track entry at `frame`. Interpolated entries use a 1 px outline.
void draw_tracks(Canvas& canvas, std::span<const Track> tracks, int frame);

}  // namespace trackforge
