#pragma once

#include <vector>

#include "trackforge/track.hpp"

namespace trackforge {

struct RankConfig {
  double lambda = 0.5;
  void validate() const;
};

// lambda * e_score + (1 - lambda) * i_score; also stored in t.rank_score.
double score_track(Track& t, double lambda);

// Scores every track, then sorts by descending rank_score, longer track
// first on ties, then lower id.
std::vector<Track> rank_tracks(std::vector<Track> tracks, double lambda);

// Sorts by the stored rank_score with the same tie-breaks, no rescoring.
void sort_by_rank(std::vector<Track>& tracks);

}  // namespace trackforge
