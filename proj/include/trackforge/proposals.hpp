#pragma once

#include <string>
#include <utility>
#include <vector>

#include "trackforge/box.hpp"

namespace trackforge {

// Candidate boxes of one frame, sorted by normalized score, best first.
struct FrameProposals {
  std::string video_id;
  int frame = 0;
  std::vector<Box> boxes;
  std::pair<double, double> raw_score_range{0.0, 0.0};  // per video

  friend bool operator==(const FrameProposals&, const FrameProposals&) = default;
};

}  // namespace trackforge
