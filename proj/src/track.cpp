#include "trackforge/track.hpp"

namespace trackforge {

void update_score_components(Track& track) {
  double score_sum = 0.0;
  int matched = 0;
  double iou_sum = 0.0;
  int ious = 0;
  for (const TrackEntry& e : track.entries) {
    if (!e.matched()) continue;
    score_sum += e.box.score;
    ++matched;
    if (e.match_iou) {
      iou_sum += *e.match_iou;
      ++ious;
    }
  }
  track.e_score = matched > 0 ? score_sum / matched : 0.0;
  track.i_score = ious > 0 ? iou_sum / ious : 0.0;
}

bool is_finalized(const Track& track) noexcept {
  if (track.entries.empty()) return false;
  if (!track.entries.front().matched() || !track.entries.back().matched()) return false;
  for (std::size_t k = 1; k < track.entries.size(); ++k) {
    if (track.entries[k].frame != track.entries[k - 1].frame + 1) return false;
  }
  return true;
}

}  // namespace trackforge
