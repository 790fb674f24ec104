#include "trackforge/flow.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <tuple>

#include "trackforge/error.hpp"

namespace trackforge {

FlowField::FlowField(int width, int height, int frame_index)
    : width(width), height(height), frame_index(frame_index), dx(size(), 0.0f), dy(size(), 0.0f) {
  if (width < 0 || height < 0) throw DimensionMismatch("negative flow field dimensions");
}

FlowField FlowField::uniform(int width, int height, int frame_index, float dx, float dy) {
  FlowField f(width, height, frame_index);
  std::fill(f.dx.begin(), f.dx.end(), dx);
  std::fill(f.dy.begin(), f.dy.end(), dy);
  return f;
}

void FlowField::validate() const {
  if (width < 0 || height < 0 || dx.size() != size() || dy.size() != size()) {
    throw DimensionMismatch("flow grids do not match " + std::to_string(width) + "x" +
                            std::to_string(height));
  }
  for (std::size_t k = 0; k < size(); ++k) {
    if (!std::isfinite(dx[k]) || !std::isfinite(dy[k])) {
      throw InvalidArgument("non-finite displacement in flow field " +
                            std::to_string(frame_index));
    }
  }
}

namespace {

int clamp_to_int(double v, int lo, int hi) {
  if (!(v > lo)) return lo;  // also catches NaN
  if (v >= hi) return hi;
  return static_cast<int>(v);
}

}  // namespace

PixelSpan pixel_span(const Box& b, int width, int height) noexcept {
  // Pixel px is inside iff x <= px + 0.5 < x + w.
  PixelSpan s;
  s.x0 = clamp_to_int(std::ceil(b.x - 0.5), 0, width);
  s.x1 = clamp_to_int(std::ceil(b.x + b.w - 0.5), 0, width);
  s.y0 = clamp_to_int(std::ceil(b.y - 0.5), 0, height);
  s.y1 = clamp_to_int(std::ceil(b.y + b.h - 0.5), 0, height);
  // Settle rounding in the subtractions: each bound becomes the smallest p
  // with p + 0.5 >= edge.
  auto settle = [](int& p, double edge, int limit) {
    while (p > 0 && p - 0.5 >= edge) --p;
    while (p < limit && p + 0.5 < edge) ++p;
  };
  settle(s.x0, b.x, width);
  settle(s.y0, b.y, height);
  settle(s.x1, b.x + b.w, width);
  settle(s.y1, b.y + b.h, height);
  return s;
}

Displacement mean_offset(const FlowField& field, const Box& b) {
  const PixelSpan s = pixel_span(b, field.width, field.height);
  if (s.empty()) throw EmptySupport();
  double sx = 0.0;
  double sy = 0.0;
  for (int py = s.y0; py < s.y1; ++py) {
    for (int px = s.x0; px < s.x1; ++px) {
      sx += field.at_dx(px, py);
      sy += field.at_dy(px, py);
    }
  }
  const double n = static_cast<double>(s.count());
  return {sx / n, sy / n};
}

double mean_magnitude(const FlowField& field, const Box& b) {
  const PixelSpan s = pixel_span(b, field.width, field.height);
  if (s.empty()) throw EmptySupport();
  double sum = 0.0;
  for (int py = s.y0; py < s.y1; ++py) {
    for (int px = s.x0; px < s.x1; ++px) {
      sum += std::hypot(static_cast<double>(field.at_dx(px, py)),
                        static_cast<double>(field.at_dy(px, py)));
    }
  }
  return sum / static_cast<double>(s.count());
}

Box shift(const Box& b, double dx, double dy) noexcept {
  Box out = b;
  out.x += dx;
  out.y += dy;
  return out;
}

FlowField estimate_flow(const Image& frame_a, const Image& frame_b, int block, int radius,
                        int frame_index) {
  if (frame_a.width != frame_b.width || frame_a.height != frame_b.height) {
    throw DimensionMismatch("frames differ in size");
  }
  if (block < 1) throw InvalidArgument("block size must be >= 1");
  if (radius < 0) throw InvalidArgument("search radius must be >= 0");

  std::vector<std::array<int, 2>> candidates;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) candidates.push_back({dx, dy});
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    return std::tuple(a[0] * a[0] + a[1] * a[1], a[0], a[1]) <
           std::tuple(b[0] * b[0] + b[1] * b[1], b[0], b[1]);
  });

  const int w = frame_a.width;
  const int h = frame_a.height;
  FlowField out(w, h, frame_index);
  for (int by = 0; by < h; by += block) {
    const int ey = std::min(h, by + block);
    for (int bx = 0; bx < w; bx += block) {
      const int ex = std::min(w, bx + block);
      double best = std::numeric_limits<double>::infinity();
      std::array<int, 2> best_d{0, 0};
      for (const auto& [dx, dy] : candidates) {
        if (bx + dx < 0 || ex + dx > w || by + dy < 0 || ey + dy > h) continue;
        double sad = 0.0;
        for (int py = by; py < ey && sad < best; ++py) {
          for (int px = bx; px < ex; ++px) {
            sad += std::abs(static_cast<double>(frame_a.at(px, py)) - frame_b.at(px + dx, py + dy));
          }
        }
        if (sad < best) {
          best = sad;
          best_d = {dx, dy};
        }
      }
      for (int py = by; py < ey; ++py) {
        for (int px = bx; px < ex; ++px) {
          out.at_dx(px, py) = static_cast<float>(best_d[0]);
          out.at_dy(px, py) = static_cast<float>(best_d[1]);
        }
      }
    }
  }
  return out;
}

namespace {

constexpr std::array<char, 4> kMagic{'T', 'F', 'L', 'O'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) buf.push_back(static_cast<unsigned char>((v >> (8 * k)) & 0xFFu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_flow(const FlowField& field, const std::filesystem::path& path) {
  field.validate();
  std::vector<unsigned char> buf;
  buf.reserve(20 + field.size() * 8);
  buf.insert(buf.end(), kMagic.begin(), kMagic.end());
  put_u32(buf, kVersion);
  put_u32(buf, static_cast<std::uint32_t>(field.frame_index));
  put_u32(buf, static_cast<std::uint32_t>(field.width));
  put_u32(buf, static_cast<std::uint32_t>(field.height));
  for (std::size_t k = 0; k < field.size(); ++k) {
    put_u32(buf, std::bit_cast<std::uint32_t>(field.dx[k]));
    put_u32(buf, std::bit_cast<std::uint32_t>(field.dy[k]));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error("failed writing " + path.string());
}

FlowField read_flow(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open flow file " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < 20 || std::memcmp(buf.data(), kMagic.data(), 4) != 0) {
    throw ParseError("not a TFLO file: " + path.string());
  }
  if (get_u32(buf.data() + 4) != kVersion) {
    throw ParseError("unsupported TFLO version in " + path.string());
  }
  const std::uint32_t frame = get_u32(buf.data() + 8);
  const std::uint32_t width = get_u32(buf.data() + 12);
  const std::uint32_t height = get_u32(buf.data() + 16);
  const std::uint64_t n = static_cast<std::uint64_t>(width) * height;
  if (width > 1u << 16 || height > 1u << 16 || buf.size() != 20 + n * 8) {
    throw ParseError("truncated or oversized TFLO payload in " + path.string());
  }
  FlowField f(static_cast<int>(width), static_cast<int>(height), static_cast<int>(frame));
  const unsigned char* p = buf.data() + 20;
  for (std::size_t k = 0; k < n; ++k, p += 8) {
    f.dx[k] = std::bit_cast<float>(get_u32(p));
    f.dy[k] = std::bit_cast<float>(get_u32(p + 4));
  }
  try {
    f.validate();
  } catch (const Error& e) {
    throw ParseError(std::string(e.what()) + " in " + path.string());
  }
  return f;
}

std::filesystem::path flow_path(const std::filesystem::path& dir, int frame_index) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06d.tflo", frame_index);
  return dir / name;
}

const FlowField& ZeroFlow::field(int frame) const {
  // Zero flow has no grid; callers go through offset() / magnitude().
  throw MissingFlow(frame);
}

FieldFlow::FieldFlow(std::vector<FlowField> fields) {
  for (auto& f : fields) add(std::move(f));
}

void FieldFlow::add(FlowField field) {
  field.validate();
  const int key = field.frame_index;
  fields_.insert_or_assign(key, std::move(field));
}

bool FieldFlow::has(int frame) const { return fields_.contains(frame); }

const FlowField& FieldFlow::field(int frame) const {
  auto it = fields_.find(frame);
  if (it == fields_.end()) throw MissingFlow(frame);
  return it->second;
}

bool DirectoryFlow::has(int frame) const {
  {
    std::lock_guard lock(mu_);
    if (cache_.contains(frame)) return true;
  }
  std::error_code ec;
  return std::filesystem::is_regular_file(flow_path(dir_, frame), ec);
}

const FlowField& DirectoryFlow::field(int frame) const {
  std::lock_guard lock(mu_);
  auto it = cache_.find(frame);
  if (it != cache_.end()) return *it->second;
  const auto path = flow_path(dir_, frame);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw MissingFlow(frame);
  auto field = std::make_unique<FlowField>(read_flow(path));
  if (field->frame_index != frame) {
    throw ParseError(path.string() + " declares frame " + std::to_string(field->frame_index));
  }
  return *cache_.emplace(frame, std::move(field)).first->second;
}

}  // namespace trackforge
