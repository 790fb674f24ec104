#include "trackforge/synth.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <numbers>

#include "trackforge/error.hpp"
#include "trackforge/geometry.hpp"

namespace trackforge {

using nlohmann::json;

json SceneSpec::to_json() const {
  json objs = json::array();
  for (const SceneObject& o : objects) {
    objs.push_back({{"box", {o.start.x, o.start.y, o.start.w, o.start.h}},
                    {"velocity", {o.vx, o.vy}},
                    {"first_frame", o.first_frame},
                    {"last_frame", o.last_frame}});
  }
  return {{"video", video},   {"width", width},   {"height", height}, {"frames", frames},
          {"jitter", jitter}, {"decoys", decoys}, {"seed", seed},     {"objects", std::move(objs)}};
}

SceneSpec SceneSpec::from_json(const json& j) {
  SceneSpec s;
  try {
    s.video = j.value("video", s.video);
    s.width = j.value("width", s.width);
    s.height = j.value("height", s.height);
    s.frames = j.value("frames", s.frames);
    s.jitter = j.value("jitter", s.jitter);
    s.decoys = j.value("decoys", s.decoys);
    s.seed = j.value("seed", s.seed);
    for (const json& jo : j.value("objects", json::array())) {
      SceneObject o;
      const auto& b = jo.at("box");
      o.start = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                 b.at(3).get<double>(), 1.0};
      if (jo.contains("velocity")) {
        o.vx = jo["velocity"].at(0).get<double>();
        o.vy = jo["velocity"].at(1).get<double>();
      }
      o.first_frame = jo.value("first_frame", 0);
      o.last_frame = jo.value("last_frame", -1);
      s.objects.push_back(o);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("scene spec: ") + e.what());
  }
  if (s.width < 1 || s.height < 1 || s.frames < 1 || s.decoys < 0 || !(s.jitter >= 0.0)) {
    throw ParseError("scene spec: width, height, frames must be >= 1; decoys, jitter >= 0");
  }
  for (const SceneObject& o : s.objects) {
    if (!(o.start.w > 0.0 && o.start.h > 0.0)) throw ParseError("scene spec: object box must have w, h > 0");
  }
  return s;
}

int Scene::origin_of(int frame, int box_index) const {
  for (const ProposalOrigin& o : origins) {
    if (o.frame == frame && o.box_index == box_index) return o.object;
  }
  return -1;
}

namespace {

int object_last_frame(const SceneObject& o, int frames) {
  return o.last_frame < 0 ? frames - 1 : std::min(o.last_frame, frames - 1);
}

bool visible(const SceneObject& o, int frame, int frames) {
  return frame >= o.first_frame && frame <= object_last_frame(o, frames);
}

Box object_box(const SceneObject& o, int frame) {
  const double t = frame - o.first_frame;
  return {o.start.x + o.vx * t, o.start.y + o.vy * t, o.start.w, o.start.h, 1.0};
}

}  // namespace

Scene generate_scene(const SceneSpec& spec) {
  Scene scene;
  scene.spec = spec;
  Rng rng(spec.seed);
  const double j = spec.jitter;

  std::vector<int> record_object;
  for (int f = 0; f < spec.frames; ++f) {
    for (std::size_t k = 0; k < spec.objects.size(); ++k) {
      const SceneObject& o = spec.objects[k];
      if (!visible(o, f, spec.frames)) continue;
      const Box gt = object_box(o, f);
      Box p = gt;
      p.x += rng.uniform(-j, j) * gt.w;
      p.y += rng.uniform(-j, j) * gt.h;
      p.w += rng.uniform(-j, j) * gt.w;
      p.h += rng.uniform(-j, j) * gt.h;
      p.w = std::max(p.w, 1.0);
      p.h = std::max(p.h, 1.0);
      p.score = rng.uniform(0.5, 1.0);
      scene.records.push_back({spec.video, f, p});
      record_object.push_back(static_cast<int>(k));
    }
    for (int d = 0; d < spec.decoys; ++d) {
      Box p;
      p.w = rng.uniform(0.1, 0.35) * spec.width;
      p.h = rng.uniform(0.1, 0.35) * spec.height;
      p.x = rng.uniform(0.0, spec.width - p.w);
      p.y = rng.uniform(0.0, spec.height - p.h);
      p.score = rng.uniform(0.0, 0.8);
      scene.records.push_back({spec.video, f, p});
      record_object.push_back(-1);
    }
  }

  if (!scene.records.empty()) {
    scene.frames = frames_from_records(scene.records, INT_MAX);
    // Same stable ordering as frames_from_records, replayed on the origins.
    const auto [lo_it, hi_it] = std::minmax_element(
        scene.records.begin(), scene.records.end(),
        [](const ProposalRecord& a, const ProposalRecord& b) { return a.box.score < b.box.score; });
    const double lo = lo_it->box.score;
    const double range = hi_it->box.score - lo;
    std::size_t r = 0;
    while (r < scene.records.size()) {
      const int f = scene.records[r].frame;
      std::vector<std::pair<double, int>> order;
      for (; r < scene.records.size() && scene.records[r].frame == f; ++r) {
        const double s = range > 0.0 ? (scene.records[r].box.score - lo) / range : 1.0;
        order.emplace_back(s, record_object[r]);
      }
      std::stable_sort(order.begin(), order.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      for (std::size_t k = 0; k < order.size(); ++k) {
        scene.origins.push_back({f, static_cast<int>(k), order[k].second});
      }
    }
  }

  for (int f = 0; f + 1 < spec.frames; ++f) {
    FlowField field(spec.width, spec.height, f);
    for (const SceneObject& o : spec.objects) {
      if (!visible(o, f, spec.frames)) continue;
      const PixelSpan s = pixel_span(object_box(o, f), spec.width, spec.height);
      for (int py = s.y0; py < s.y1; ++py) {
        for (int px = s.x0; px < s.x1; ++px) {
          field.at_dx(px, py) = static_cast<float>(o.vx);
          field.at_dy(px, py) = static_cast<float>(o.vy);
        }
      }
    }
    scene.flows.push_back(std::move(field));
  }

  for (std::size_t k = 0; k < spec.objects.size(); ++k) {
    const SceneObject& o = spec.objects[k];
    Track t;
    t.id = static_cast<int>(k);
    t.video = spec.video;
    for (int f = std::max(0, o.first_frame); f <= object_last_frame(o, spec.frames); ++f) {
      t.entries.push_back({f, object_box(o, f), Provenance::Matched, std::nullopt, -1});
    }
    if (t.entries.empty()) continue;
    update_score_components(t);
    scene.ground_truth.push_back(std::move(t));
  }
  return scene;
}

SceneSpec random_scene_spec(std::uint64_t seed, int moving, int logos, int frames, double jitter,
                            int decoys, int width, int height) {
  SceneSpec spec;
  spec.video = "scene" + std::to_string(seed);
  spec.width = width;
  spec.height = height;
  spec.frames = frames;
  spec.jitter = jitter;
  spec.decoys = decoys;
  spec.seed = seed;
  Rng rng(seed * 0x9E3779B97F4A7C15ull + 0x2545F4914F6CDD1Dull);
  const int span = frames - 1;

  auto overlaps_any = [&](const SceneObject& cand) {
    for (const SceneObject& o : spec.objects) {
      for (int f = 0; f < frames; ++f) {
        if (iou(object_box(o, f), object_box(cand, f)) > 0.0) return true;
      }
    }
    return false;
  };

  for (int k = 0; k < moving + logos; ++k) {
    const bool logo = k >= moving;
    SceneObject best;
    for (int attempt = 0; attempt < 200; ++attempt) {
      SceneObject o;
      if (logo) {
        o.start.w = rng.uniform(0.10, 0.15) * width;
        o.start.h = rng.uniform(0.08, 0.12) * height;
      } else {
        o.start.w = rng.uniform(0.15, 0.22) * width;
        o.start.h = rng.uniform(0.18, 0.28) * height;
        const double speed = rng.uniform(2.0, 3.5);
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        o.vx = speed * std::cos(angle);
        o.vy = speed * std::sin(angle);
        // Keep the whole path inside the frame.
        const double max_vx = (width - o.start.w) / std::max(span, 1);
        const double max_vy = (height - o.start.h) / std::max(span, 1);
        const double shrink = std::min({1.0, 0.9 * max_vx / std::max(std::abs(o.vx), 1e-9),
                                        0.9 * max_vy / std::max(std::abs(o.vy), 1e-9)});
        o.vx *= shrink;
        o.vy *= shrink;
      }
      const double travel_x = o.vx * span;
      const double travel_y = o.vy * span;
      const double x_lo = std::max(0.0, -travel_x);
      const double x_hi = width - o.start.w - std::max(0.0, travel_x);
      const double y_lo = std::max(0.0, -travel_y);
      const double y_hi = height - o.start.h - std::max(0.0, travel_y);
      o.start.x = rng.uniform(x_lo, std::max(x_lo, x_hi));
      o.start.y = rng.uniform(y_lo, std::max(y_lo, y_hi));
      o.start.score = 1.0;
      best = o;
      if (!overlaps_any(o)) break;
    }
    spec.objects.push_back(best);
  }
  return spec;
}

double coverage(const Track& pred, const Track& gt) {
  if (gt.entries.empty() || pred.video != gt.video) return 0.0;
  double sum = 0.0;
  for (const TrackEntry& g : gt.entries) {
    if (const TrackEntry* p = pred.at_frame(g.frame)) sum += iou(p->box, g.box);
  }
  return sum / static_cast<double>(gt.entries.size());
}

double temporal_recall(std::span<const Track> predicted, std::span<const Track> ground_truth,
                       double iou_thresh) {
  if (ground_truth.empty()) return 0.0;
  int hit = 0;
  for (const Track& gt : ground_truth) {
    const bool covered = std::any_of(predicted.begin(), predicted.end(), [&](const Track& p) {
      return coverage(p, gt) > iou_thresh;
    });
    hit += covered ? 1 : 0;
  }
  return static_cast<double>(hit) / static_cast<double>(ground_truth.size());
}

std::vector<ProbVector> plant_probabilities(const Scene& scene, int classes, std::uint64_t seed) {
  if (classes < 2) throw InvalidArgument("need at least 2 classes");
  Rng rng(seed);
  std::vector<ProbVector> out;
  out.reserve(scene.origins.size());
  for (const ProposalOrigin& o : scene.origins) {
    ProbVector p;
    p.ref = {scene.spec.video, o.frame, o.box_index};
    p.probs.resize(static_cast<std::size_t>(classes));
    if (o.object >= 0) {
      const auto label = static_cast<std::size_t>((o.object * 37 + 11) % classes);
      const double peak = rng.uniform(0.85, 0.98);
      double rest = 0.0;
      for (std::size_t c = 0; c < p.probs.size(); ++c) {
        if (c == label) continue;
        p.probs[c] = rng.uniform();
        rest += p.probs[c];
      }
      for (std::size_t c = 0; c < p.probs.size(); ++c) {
        p.probs[c] = c == label ? peak : (1.0 - peak) * p.probs[c] / rest;
      }
    } else {
      double total = 0.0;
      for (double& v : p.probs) {
        v = rng.uniform(0.5, 1.5);
        total += v;
      }
      for (double& v : p.probs) v /= total;
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace trackforge
