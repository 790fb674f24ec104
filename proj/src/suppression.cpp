#include "trackforge/suppression.hpp"

#include <algorithm>

#include "trackforge/error.hpp"
#include "trackforge/geometry.hpp"

namespace trackforge {

void SuppressionConfig::validate() const {
  if (!(nms_viou > 0.0 && nms_viou <= 1.0)) throw InvalidArgument("nms_viou must be in (0, 1]");
  if (min_length < 1) throw InvalidArgument("min_length must be >= 1");
  if (!(static_thresh >= 0.0)) throw InvalidArgument("static_thresh must be >= 0");
}

std::vector<Track> temporal_nms(std::vector<Track> tracks, double nms_viou) {
  std::stable_sort(tracks.begin(), tracks.end(), [](const Track& a, const Track& b) {
    if (a.rank_score != b.rank_score) return a.rank_score > b.rank_score;
    return a.id < b.id;
  });
  std::vector<Track> kept;
  for (Track& t : tracks) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Track& k) {
      return viou(k, t) > nms_viou;
    });
    if (!suppressed) kept.push_back(std::move(t));
  }
  return kept;
}

std::vector<Track> filter_short(std::vector<Track> tracks, int min_length) {
  std::erase_if(tracks, [min_length](const Track& t) { return t.length() < min_length; });
  return tracks;
}

double track_motion(const Track& track, const FlowProvider& flows) {
  double sum = 0.0;
  int used = 0;
  for (const TrackEntry& e : track.entries) {
    int frame = e.frame;
    if (!flows.has(frame)) {
      if (!flows.has(frame - 1)) throw MissingFlow(frame);
      frame -= 1;
    }
    try {
      sum += flows.magnitude(frame, e.box);
      ++used;
    } catch (const EmptySupport&) {
    }
  }
  if (used == 0) throw EmptySupport();
  return sum / used;
}

std::vector<Track> filter_static(std::vector<Track> tracks, const FlowProvider& flows,
                                 double static_thresh) {
  std::erase_if(tracks, [&](const Track& t) {
    double motion = 0.0;
    try {
      motion = track_motion(t, flows);
    } catch (const EmptySupport&) {
      // entirely off the field: no motion evidence
    }
    return motion < static_thresh;
  });
  return tracks;
}

}  // namespace trackforge
