#pragma once

#include <optional>
#include <string>
#include <vector>

#include "trackforge/box.hpp"

namespace trackforge {

enum class Provenance { Matched, Interpolated };

struct TrackEntry {
  int frame = 0;
  Box box;
  Provenance provenance = Provenance::Matched;
  // Set for every matched entry except the seed.
  std::optional<double> match_iou;
  // Position of the box in its frame's proposal list; -1 when interpolated.
  int box_index = -1;

  bool matched() const noexcept { return provenance == Provenance::Matched; }

  friend bool operator==(const TrackEntry&, const TrackEntry&) = default;
};

// A finalized track is gapless: entries[k].frame == first_frame() + k, and
// both the first and the last entry are Matched.
struct Track {
  int id = 0;
  std::string video;
  std::vector<TrackEntry> entries;
  int ttl = 0;  // only meaningful while the track is live
  double e_score = 0.0;     // mean proposal score of matched entries
  double i_score = 0.0;     // mean match IoU, 0 when no match exists
  double rank_score = 0.0;  // lambda * e_score + (1 - lambda) * i_score

  int length() const noexcept { return static_cast<int>(entries.size()); }
  int first_frame() const { return entries.front().frame; }
  int last_frame() const { return entries.back().frame; }

  // Entry at `frame` for a gapless track, nullptr outside its support.
  const TrackEntry* at_frame(int frame) const noexcept {
    if (entries.empty() || frame < entries.front().frame || frame > entries.back().frame) {
      return nullptr;
    }
    return &entries[static_cast<std::size_t>(frame - entries.front().frame)];
  }

  friend bool operator==(const Track& a, const Track& b) {
    return a.id == b.id && a.video == b.video && a.entries == b.entries &&
           a.e_score == b.e_score && a.i_score == b.i_score && a.rank_score == b.rank_score;
  }
};

// Recomputes e_score and i_score from the entries.
void update_score_components(Track& track);

// True when frames are consecutive and both extremes are Matched.
bool is_finalized(const Track& track) noexcept;

}  // namespace trackforge
