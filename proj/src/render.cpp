#include "trackforge/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "trackforge/error.hpp"

namespace trackforge {

void write_ppm(const Canvas& canvas, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "P6\n" << canvas.width << ' ' << canvas.height << "\n255\n";
  for (const Rgb& p : canvas.pixels) {
    const char px[3] = {static_cast<char>(p.r), static_cast<char>(p.g), static_cast<char>(p.b)};
    out.write(px, 3);
  }
  if (!out) throw Error("failed writing " + path.string());
}

Canvas read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open image " + path.string());
  auto next_token = [&]() {
    std::string tok;
    char c;
    while (in.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!tok.empty()) break;
        continue;
      }
      tok += c;
    }
    return tok;
  };
  if (next_token() != "P6") throw ParseError(path.string() + " is not a binary PPM (P6)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw ParseError("bad PPM header in " + path.string());
  }
  if (w < 1 || h < 1 || maxval != 255) throw ParseError("unsupported PPM header in " + path.string());
  Canvas c(w, h);
  for (Rgb& p : c.pixels) {
    char px[3];
    if (!in.read(px, 3)) throw ParseError("truncated PPM " + path.string());
    p = {static_cast<std::uint8_t>(px[0]), static_cast<std::uint8_t>(px[1]),
         static_cast<std::uint8_t>(px[2])};
  }
  return c;
}

Rgb track_color(int track_id) noexcept {
  // Golden-ratio hue walk, full saturation and value.
  const double hue = std::fmod(0.11 + 0.618033988749895 * static_cast<unsigned>(track_id), 1.0) * 6.0;
  const int sector = static_cast<int>(hue) % 6;
  const double f = hue - std::floor(hue);
  const auto up = static_cast<std::uint8_t>(std::lround(255.0 * f));
  const auto down = static_cast<std::uint8_t>(255 - up);
  switch (sector) {
    case 0: return {255, up, 0};
    case 1: return {down, 255, 0};
    case 2: return {0, 255, up};
    case 3: return {0, down, 255};
    case 4: return {up, 0, 255};
    default: return {255, 0, down};
  }
}

void draw_box(Canvas& canvas, const Box& b, Rgb color, int thickness) {
  const long x0 = std::lround(b.x);
  const long y0 = std::lround(b.y);
  const long x1 = std::lround(b.x + b.w) - 1;
  const long y1 = std::lround(b.y + b.h) - 1;
  auto plot = [&](long px, long py) {
    if (px < 0 || py < 0 || px >= canvas.width || py >= canvas.height) return;
    canvas.at(static_cast<int>(px), static_cast<int>(py)) = color;
  };
  for (int t = 0; t < thickness; ++t) {
    const long lx = std::max(x0 + t, -1L), rx = std::min(x1 - t, static_cast<long>(canvas.width));
    const long ty = std::max(y0 + t, -1L), by = std::min(y1 - t, static_cast<long>(canvas.height));
    if (lx > rx || ty > by) break;
    for (long px = lx; px <= rx; ++px) {
      plot(px, y0 + t);
      plot(px, y1 - t);
    }
    for (long py = ty; py <= by; ++py) {
      plot(x0 + t, py);
      plot(x1 - t, py);
    }
  }
}

void draw_tracks(Canvas& canvas, std::span<const Track> tracks, int frame) {
  for (const Track& t : tracks) {
    if (const TrackEntry* e = t.at_frame(frame)) {
      draw_box(canvas, e->box, track_color(t.id), e->matched() ? 2 : 1);
    }
  }
}

}  // namespace trackforge
