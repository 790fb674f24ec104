// Naive reference for build_tracks: dense per-frame tables, full-field scans
// for the flow mean, and its own overlap and interpolation arithmetic. It
// shares only the data types with the production builder.

#include <algorithm>
#include <cmath>
#include <map>

#include "trackforge/error.hpp"
#include "trackforge/synth.hpp"

namespace trackforge {

namespace {

double naive_overlap(const Box& a, const Box& b) {
  const double ix = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double iy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  return inter / (a.w * a.h + b.w * b.h - inter);
}

// Scans every pixel of the field; (0, 0) when no center lies in the box.
std::pair<double, double> naive_mean_flow(const FlowField& field, const Box& b) {
  double sx = 0.0, sy = 0.0;
  long long n = 0;
  for (int py = 0; py < field.height; ++py) {
    for (int px = 0; px < field.width; ++px) {
      const double cx = px + 0.5;
      const double cy = py + 0.5;
      if (cx >= b.x && cx < b.x + b.w && cy >= b.y && cy < b.y + b.h) {
        sx += field.dx[static_cast<std::size_t>(py) * field.width + px];
        sy += field.dy[static_cast<std::size_t>(py) * field.width + px];
        ++n;
      }
    }
  }
  if (n == 0) return {0.0, 0.0};
  return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

struct OracleTrack {
  std::vector<int> frames;
  std::vector<Box> boxes;
  std::vector<int> indices;
  std::vector<double> ious;  // NaN for the seed
  int ttl = 0;
  Box ref;
  bool alive = true;
};

}  // namespace

std::vector<Track> oracle_build_tracks(std::span<const FrameProposals> frames,
                                       const FlowProvider& flows, const BuilderConfig& cfg) {
  cfg.validate();
  if (frames.empty()) return {};
  const int first = frames.front().frame;
  const int last = frames.back().frame;

  std::map<int, std::vector<Box>> table;
  for (int f = first; f <= last; ++f) table[f];
  for (const FrameProposals& fp : frames) {
    std::vector<Box> boxes = fp.boxes;
    std::stable_sort(boxes.begin(), boxes.end(),
                     [](const Box& a, const Box& b) { return a.score > b.score; });
    if (static_cast<int>(boxes.size()) > cfg.top_k) boxes.resize(static_cast<std::size_t>(cfg.top_k));
    table[fp.frame] = boxes;
  }

  std::vector<OracleTrack> all;
  auto start_tracks = [&](int f, const std::vector<bool>& taken) {
    for (std::size_t k = 0; k < table[f].size(); ++k) {
      if (taken[k]) continue;
      OracleTrack t;
      t.frames = {f};
      t.boxes = {table[f][k]};
      t.indices = {static_cast<int>(k)};
      t.ious = {std::nan("")};
      t.ttl = cfg.gamma;
      t.ref = table[f][k];
      all.push_back(t);
    }
  };
  start_tracks(first, std::vector<bool>(table[first].size(), false));

  for (int f = first; f < last; ++f) {
    const std::vector<Box>& next = table[f + 1];
    std::vector<bool> taken(next.size(), false);
    for (std::size_t id = 0; id < all.size(); ++id) {
      OracleTrack& t = all[id];
      if (!t.alive) continue;
      double mx = 0.0, my = 0.0;
      if (!flows.is_zero()) std::tie(mx, my) = naive_mean_flow(flows.field(f), t.ref);
      Box moved = t.ref;
      moved.x = t.ref.x + mx;
      moved.y = t.ref.y + my;
      int pick = -1;
      double pick_iou = 0.0;
      for (std::size_t k = 0; k < next.size(); ++k) {
        if (taken[k]) continue;
        const double v = naive_overlap(moved, next[k]);
        if (v > pick_iou) {
          pick_iou = v;
          pick = static_cast<int>(k);
        }
      }
      if (pick >= 0 && pick_iou > cfg.theta_tau) {
        taken[static_cast<std::size_t>(pick)] = true;
        t.frames.push_back(f + 1);
        t.boxes.push_back(next[static_cast<std::size_t>(pick)]);
        t.indices.push_back(pick);
        t.ious.push_back(pick_iou);
        t.ref = next[static_cast<std::size_t>(pick)];
        t.ttl = t.ttl + 1 > cfg.gamma ? cfg.gamma : t.ttl + 1;
      } else {
        t.ref = moved;
        t.ttl = t.ttl - 1;
        if (t.ttl == 0) t.alive = false;
      }
    }
    start_tracks(f + 1, taken);
  }

  std::vector<Track> out;
  for (std::size_t id = 0; id < all.size(); ++id) {
    const OracleTrack& o = all[id];
    Track t;
    t.id = static_cast<int>(id);
    t.video = frames.front().video_id;
    double score_sum = 0.0, iou_sum = 0.0;
    int iou_count = 0;
    for (std::size_t m = 0; m < o.frames.size(); ++m) {
      if (m > 0) {
        const int gap = o.frames[m] - o.frames[m - 1];
        const Box& a = o.boxes[m - 1];
        const Box& b = o.boxes[m];
        for (int k = 1; k < gap; ++k) {
          TrackEntry e;
          e.frame = o.frames[m - 1] + k;
          e.provenance = Provenance::Interpolated;
          e.box.x = a.x + (b.x - a.x) * static_cast<double>(k) / gap;
          e.box.y = a.y + (b.y - a.y) * static_cast<double>(k) / gap;
          e.box.w = a.w + (b.w - a.w) * static_cast<double>(k) / gap;
          e.box.h = a.h + (b.h - a.h) * static_cast<double>(k) / gap;
          e.box.score = 0.0;
          t.entries.push_back(e);
        }
      }
      TrackEntry e;
      e.frame = o.frames[m];
      e.box = o.boxes[m];
      e.box_index = o.indices[m];
      if (!std::isnan(o.ious[m])) {
        e.match_iou = o.ious[m];
        iou_sum += o.ious[m];
        ++iou_count;
      }
      score_sum += o.boxes[m].score;
      t.entries.push_back(e);
    }
    t.e_score = score_sum / static_cast<double>(o.frames.size());
    t.i_score = iou_count > 0 ? iou_sum / iou_count : 0.0;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace trackforge
