#pragma once

#include <span>
#include <vector>

#include "trackforge/flow.hpp"
#include "trackforge/proposals.hpp"
#include "trackforge/ranking.hpp"
#include "trackforge/suppression.hpp"
#include "trackforge/track_builder.hpp"

namespace trackforge {

struct PipelineConfig {
  BuilderConfig builder;
  SuppressionConfig suppression;
  RankConfig rank;
  bool static_filter = true;
};

// build -> filter_short -> filter_static -> rank -> temporal_nms.
// Result is in rank order.
std::vector<Track> run_pipeline(std::span<const FrameProposals> frames, const FlowProvider& flows,
                                const PipelineConfig& cfg);

}  // namespace trackforge
