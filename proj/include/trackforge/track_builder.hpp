#pragma once

#include <span>
#include <vector>

#include "trackforge/flow.hpp"
#include "trackforge/proposals.hpp"
#include "trackforge/track.hpp"

namespace trackforge {

struct BuilderConfig {
  double theta_tau = 0.5;  // match threshold, strict
  int gamma = 5;           // initial and maximum TTL
  int top_k = 25;          // proposals considered per frame

  void validate() const;
};

// Links the proposals of one video into finalized tracks, sorted by id.
//
// Frames are processed in order; frame indices missing from `frames` are
// treated as frames with no proposals. On every transition i -> i + 1 the
// live tracks, oldest first, shift their reference box by the mean flow
// inside it and claim the unconsumed candidate of i + 1 with the best IoU
// if that IoU exceeds theta_tau. A match sets ttl = min(ttl + 1, gamma) and
// makes the candidate the new reference; a miss decrements ttl and keeps the
// shifted box as reference, so the reference follows the scene across gaps.
// Tracks reaching ttl 0 terminate. Unconsumed candidates seed new tracks
// with ttl = gamma.
//
// Throws MissingFlow when `flows` lacks a required field.
std::vector<Track> build_tracks(std::span<const FrameProposals> frames, const FlowProvider& flows,
                                const BuilderConfig& cfg);

// Linear interpolation of x, y, w, h for the frames strictly between two
// matched entries. Interpolated boxes carry score 0. Throws NotAGap.
std::vector<TrackEntry> interpolate_gap(const TrackEntry& before, const TrackEntry& after);

// Fills interior gaps and recomputes e_score / i_score. Entries must be
// matched and strictly increasing in frame.
void finalize_track(Track& track);

}  // namespace trackforge
