#pragma once

#include "trackforge/box.hpp"
#include "trackforge/track.hpp"

namespace trackforge {

double intersection_area(const Box& a, const Box& b) noexcept;

// |a ∩ b| / |a ∪ b|, 0 for disjoint boxes.
double iou(const Box& a, const Box& b) noexcept;

// Volume IoU of two gapless tracks. Per-frame intersection areas summed over
// the common frames, divided by per-frame union areas summed over every frame
// where either track is active. On frames only one track occupies, its box
// area counts toward the union alone.
double viou(const Track& t, const Track& u) noexcept;

}  // namespace trackforge
