#include "trackforge/ranking.hpp"

#include <algorithm>

#include "trackforge/error.hpp"

namespace trackforge {

void RankConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda must be in [0, 1]");
}

double score_track(Track& t, double lambda) {
  t.rank_score = lambda * t.e_score + (1.0 - lambda) * t.i_score;
  return t.rank_score;
}

void sort_by_rank(std::vector<Track>& tracks) {
  std::stable_sort(tracks.begin(), tracks.end(), [](const Track& a, const Track& b) {
    if (a.rank_score != b.rank_score) return a.rank_score > b.rank_score;
    if (a.length() != b.length()) return a.length() > b.length();
    return a.id < b.id;
  });
}

std::vector<Track> rank_tracks(std::vector<Track> tracks, double lambda) {
  RankConfig{lambda}.validate();
  for (Track& t : tracks) score_track(t, lambda);
  sort_by_rank(tracks);
  return tracks;
}

}  // namespace trackforge
