#include "trackforge/geometry.hpp"

#include <algorithm>

namespace trackforge {

double intersection_area(const Box& a, const Box& b) noexcept {
  const double iw = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
  const double ih = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
  return iw * ih;
}

double iou(const Box& a, const Box& b) noexcept {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return inter / uni;
}

double viou(const Track& t, const Track& u) noexcept {
  if (t.entries.empty() || u.entries.empty()) return 0.0;
  const int first = std::min(t.first_frame(), u.first_frame());
  const int last = std::max(t.last_frame(), u.last_frame());
  double inter = 0.0;
  double uni = 0.0;
  for (int f = first; f <= last; ++f) {
    const TrackEntry* a = t.at_frame(f);
    const TrackEntry* b = u.at_frame(f);
    if (a && b) {
      const double i = intersection_area(a->box, b->box);
      inter += i;
      uni += a->box.area() + b->box.area() - i;
    } else if (a) {
      uni += a->box.area();
    } else if (b) {
      uni += b->box.area();
    }
  }
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace trackforge
