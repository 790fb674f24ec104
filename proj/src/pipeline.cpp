#include "trackforge/pipeline.hpp"

namespace trackforge {

std::vector<Track> run_pipeline(std::span<const FrameProposals> frames, const FlowProvider& flows,
                                const PipelineConfig& cfg) {
  cfg.suppression.validate();
  cfg.rank.validate();
  auto tracks = build_tracks(frames, flows, cfg.builder);
  tracks = filter_short(std::move(tracks), cfg.suppression.min_length);
  if (cfg.static_filter) {
    tracks = filter_static(std::move(tracks), flows, cfg.suppression.static_thresh);
  }
  tracks = rank_tracks(std::move(tracks), cfg.rank.lambda);
  tracks = temporal_nms(std::move(tracks), cfg.suppression.nms_viou);
  sort_by_rank(tracks);
  return tracks;
}

}  // namespace trackforge
