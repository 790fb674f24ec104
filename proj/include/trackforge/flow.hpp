#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "trackforge/box.hpp"

namespace trackforge {

// Dense displacement field mapping frame_index -> frame_index + 1.
struct FlowField {
  int width = 0;
  int height = 0;
  int frame_index = 0;
  std::vector<float> dx;  // row-major, width * height
  std::vector<float> dy;

  FlowField() = default;
  FlowField(int width, int height, int frame_index);
  static FlowField uniform(int width, int height, int frame_index, float dx, float dy);

  std::size_t size() const noexcept { return static_cast<std::size_t>(width) * height; }
  float& at_dx(int px, int py) { return dx[static_cast<std::size_t>(py) * width + px]; }
  float& at_dy(int px, int py) { return dy[static_cast<std::size_t>(py) * width + px]; }
  float at_dx(int px, int py) const { return dx[static_cast<std::size_t>(py) * width + px]; }
  float at_dy(int px, int py) const { return dy[static_cast<std::size_t>(py) * width + px]; }

  // Throws DimensionMismatch or InvalidArgument when the invariants fail.
  void validate() const;
};

// Grayscale frame used by the fallback estimator.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;  // row-major

  Image() = default;
  Image(int width, int height, float fill = 0.0f)
      : width(width), height(height), pixels(static_cast<std::size_t>(width) * height, fill) {}
  float& at(int px, int py) { return pixels[static_cast<std::size_t>(py) * width + px]; }
  float at(int px, int py) const { return pixels[static_cast<std::size_t>(py) * width + px]; }
};

struct Displacement {
  double dx = 0.0;
  double dy = 0.0;
  friend bool operator==(const Displacement&, const Displacement&) = default;
};

// Half-open pixel ranges [x0, x1) x [y0, y1) whose pixel centers
// (px + 0.5, py + 0.5) fall inside the box, clipped to the field.
struct PixelSpan {
  int x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  bool empty() const noexcept { return x1 <= x0 || y1 <= y0; }
  long long count() const noexcept {
    return empty() ? 0 : static_cast<long long>(x1 - x0) * (y1 - y0);
  }
};

PixelSpan pixel_span(const Box& b, int width, int height) noexcept;

// Mean (dx, dy) over the pixels inside the clipped box. Throws EmptySupport.
Displacement mean_offset(const FlowField& field, const Box& b);

// Mean per-pixel flow magnitude inside the clipped box. Throws EmptySupport.
double mean_magnitude(const FlowField& field, const Box& b);

Box shift(const Box& b, double dx, double dy) noexcept;
inline Box shift(const Box& b, Displacement d) noexcept { return shift(b, d.dx, d.dy); }

// Block-matching SAD estimate. Each block of `frame_a` gets the integer
// displacement within +-radius whose displaced block lies fully inside
// `frame_b` and minimizes the sum of absolute differences. Ties go to the
// smallest displacement magnitude, then lexicographic (dx, dy).
FlowField estimate_flow(const Image& frame_a, const Image& frame_b, int block, int radius,
                        int frame_index = 0);

// Binary TFLO format, little-endian.
void write_flow(const FlowField& field, const std::filesystem::path& path);
FlowField read_flow(const std::filesystem::path& path);
std::filesystem::path flow_path(const std::filesystem::path& dir, int frame_index);

// Source of the field for each consecutive frame pair.
class FlowProvider {
 public:
  virtual ~FlowProvider() = default;
  virtual bool has(int frame) const = 0;
  // Field mapping frame -> frame + 1. Throws MissingFlow.
  virtual const FlowField& field(int frame) const = 0;
  virtual bool is_zero() const noexcept { return false; }

  // Mean displacement inside `b` for frame -> frame + 1.
  virtual Displacement offset(int frame, const Box& b) const { return mean_offset(field(frame), b); }
  virtual double magnitude(int frame, const Box& b) const { return mean_magnitude(field(frame), b); }
};

// Flow that is identically zero; never missing, never empty.
class ZeroFlow final : public FlowProvider {
 public:
  bool has(int) const override { return true; }
  const FlowField& field(int frame) const override;
  bool is_zero() const noexcept override { return true; }
  Displacement offset(int, const Box&) const override { return {}; }
  double magnitude(int, const Box&) const override { return 0.0; }
};

// Fields held in memory, keyed by frame_index.
class FieldFlow final : public FlowProvider {
 public:
  FieldFlow() = default;
  explicit FieldFlow(std::vector<FlowField> fields);
  void add(FlowField field);
  bool has(int frame) const override;
  const FlowField& field(int frame) const override;

 private:
  std::map<int, FlowField> fields_;
};

// Lazily loads dir/%06d.tflo on first use and caches it.
class DirectoryFlow final : public FlowProvider {
 public:
  explicit DirectoryFlow(std::filesystem::path dir) : dir_(std::move(dir)) {}
  bool has(int frame) const override;
  const FlowField& field(int frame) const override;

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
  mutable std::map<int, std::unique_ptr<FlowField>> cache_;
};

}  // namespace trackforge
