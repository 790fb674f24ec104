#pragma once

#include <vector>

#include "trackforge/flow.hpp"
#include "trackforge/track.hpp"

namespace trackforge {

struct SuppressionConfig {
  double nms_viou = 0.5;
  int min_length = 10;
  double static_thresh = 1.0;  // px / frame

  void validate() const;
};

// Greedy NMS over vIoU. Tracks are visited by descending rank_score (ties by
// lower id); a track is dropped if its vIoU with an already kept track
// exceeds `nms_viou`. Survivors are returned in visiting order.
std::vector<Track> temporal_nms(std::vector<Track> tracks, double nms_viou);

std::vector<Track> filter_short(std::vector<Track> tracks, int min_length);

// Mean flow magnitude over all entries of a track. The entry at frame f uses
// the field f -> f + 1, or f - 1 -> f for the last frame of a video where no
// forward field exists. Entries whose box misses the field are skipped.
// Throws MissingFlow if no field is available for an entry, EmptySupport
// if no entry touches its field.
double track_motion(const Track& track, const FlowProvider& flows);

// Drops tracks whose track_motion is below `static_thresh`.
std::vector<Track> filter_static(std::vector<Track> tracks, const FlowProvider& flows,
                                 double static_thresh);

}  // namespace trackforge
