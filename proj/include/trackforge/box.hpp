#pragma once

namespace trackforge {

// Axis-aligned box in continuous pixel coordinates. (x, y) is the top-left
// corner; the box covers [x, x + w) x [y, y + h).
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  double score = 0.0;  // normalized proposal objectness, [0, 1]

  double right() const noexcept { return x + w; }
  double bottom() const noexcept { return y + h; }
  double area() const noexcept { return w * h; }
  bool valid() const noexcept { return w > 0.0 && h > 0.0 && score >= 0.0 && score <= 1.0; }

  friend bool operator==(const Box&, const Box&) = default;
};

}  // namespace trackforge
