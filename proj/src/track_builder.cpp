#include "trackforge/track_builder.hpp"

#include <algorithm>
#include <string>

#include "trackforge/error.hpp"
#include "trackforge/geometry.hpp"

namespace trackforge {

void BuilderConfig::validate() const {
  if (!(theta_tau > 0.0 && theta_tau < 1.0)) throw InvalidArgument("theta_tau must be in (0, 1)");
  if (gamma < 1) throw InvalidArgument("gamma must be >= 1");
  if (top_k < 1) throw InvalidArgument("top_k must be >= 1");
}

std::vector<TrackEntry> interpolate_gap(const TrackEntry& before, const TrackEntry& after) {
  const int n = after.frame - before.frame;
  if (n < 2) {
    throw NotAGap("frames " + std::to_string(before.frame) + " and " +
                  std::to_string(after.frame) + " leave no gap");
  }
  if (!before.matched() || !after.matched()) {
    throw InvalidArgument("gap ends must be matched entries");
  }
  auto lerp = [n](double a, double b, int k) { return a + (b - a) * static_cast<double>(k) / n; };
  std::vector<TrackEntry> out;
  out.reserve(static_cast<std::size_t>(n - 1));
  for (int k = 1; k < n; ++k) {
    TrackEntry e;
    e.frame = before.frame + k;
    e.box = {lerp(before.box.x, after.box.x, k), lerp(before.box.y, after.box.y, k),
             lerp(before.box.w, after.box.w, k), lerp(before.box.h, after.box.h, k), 0.0};
    e.provenance = Provenance::Interpolated;
    out.push_back(e);
  }
  return out;
}

void finalize_track(Track& track) {
  std::vector<TrackEntry> filled;
  filled.reserve(track.entries.size());
  for (const TrackEntry& e : track.entries) {
    if (!filled.empty() && e.frame - filled.back().frame >= 2) {
      auto gap = interpolate_gap(filled.back(), e);
      filled.insert(filled.end(), gap.begin(), gap.end());
    }
    filled.push_back(e);
  }
  track.entries = std::move(filled);
  track.ttl = 0;
  update_score_components(track);
}

namespace {

struct LiveTrack {
  Track track;
  Box reference;  // last matched box, carried along by the flow while unmatched
};

Displacement offset_or_zero(const FlowProvider& flows, int frame, const Box& b) {
  try {
    return flows.offset(frame, b);
  } catch (const EmptySupport&) {
    // Reference drifted off the field: keep it where it is.
    return {};
  }
}

}  // namespace

std::vector<Track> build_tracks(std::span<const FrameProposals> frames, const FlowProvider& flows,
                                const BuilderConfig& cfg) {
  cfg.validate();
  if (frames.empty()) return {};
  for (std::size_t k = 1; k < frames.size(); ++k) {
    if (frames[k].frame <= frames[k - 1].frame) {
      throw InvalidArgument("frames must be strictly increasing");
    }
    if (frames[k].video_id != frames[0].video_id) {
      throw InvalidArgument("build_tracks takes a single video");
    }
  }

  const std::string& video = frames.front().video_id;
  const auto top_k = static_cast<std::size_t>(cfg.top_k);
  std::vector<LiveTrack> live;  // ascending id
  std::vector<Track> done;
  int next_id = 0;
  std::vector<char> consumed;

  auto seed = [&](const FrameProposals& fp) {
    for (std::size_t k = 0; k < consumed.size(); ++k) {
      if (consumed[k]) continue;
      LiveTrack lt;
      lt.track.id = next_id++;
      lt.track.video = video;
      lt.track.ttl = cfg.gamma;
      lt.track.entries.push_back(
          {fp.frame, fp.boxes[k], Provenance::Matched, std::nullopt, static_cast<int>(k)});
      lt.reference = fp.boxes[k];
      live.push_back(std::move(lt));
    }
  };

  consumed.assign(std::min(frames.front().boxes.size(), top_k), 0);
  seed(frames.front());

  std::size_t next = 1;
  for (int f = frames.front().frame; f < frames.back().frame; ++f) {
    // Frame f + 1 may be absent from the input: no candidates then.
    const FrameProposals* target = nullptr;
    if (next < frames.size() && frames[next].frame == f + 1) target = &frames[next++];
    const std::size_t n = target ? std::min(target->boxes.size(), top_k) : 0;
    consumed.assign(n, 0);

    for (LiveTrack& lt : live) {
      const Box moved = shift(lt.reference, offset_or_zero(flows, f, lt.reference));
      std::size_t best = n;
      double best_iou = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (consumed[k]) continue;
        const double v = iou(moved, target->boxes[k]);
        if (v > best_iou) {
          best_iou = v;
          best = k;
        }
      }
      if (best < n && best_iou > cfg.theta_tau) {
        consumed[best] = 1;
        lt.track.entries.push_back({f + 1, target->boxes[best], Provenance::Matched, best_iou,
                                    static_cast<int>(best)});
        lt.reference = target->boxes[best];
        lt.track.ttl = std::min(lt.track.ttl + 1, cfg.gamma);
      } else {
        lt.reference = moved;
        --lt.track.ttl;
      }
    }

    auto dead = std::stable_partition(live.begin(), live.end(),
                                      [](const LiveTrack& lt) { return lt.track.ttl > 0; });
    for (auto it = dead; it != live.end(); ++it) {
      finalize_track(it->track);
      done.push_back(std::move(it->track));
    }
    live.erase(dead, live.end());

    if (target) seed(*target);
  }

  for (LiveTrack& lt : live) {
    finalize_track(lt.track);
    done.push_back(std::move(lt.track));
  }
  std::sort(done.begin(), done.end(), [](const Track& a, const Track& b) { return a.id < b.id; });
  return done;
}

}  // namespace trackforge
