#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "trackforge/entropy.hpp"
#include "trackforge/flow.hpp"
#include "trackforge/io.hpp"
#include "trackforge/proposals.hpp"
#include "trackforge/track.hpp"
#include "trackforge/track_builder.hpp"

namespace trackforge {

// std::mt19937_64 with explicit bit-level conversions, so a seed gives the
// same stream on every platform (std:: distributions are not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // [0, n), n > 0.
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  int uniform_int(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1))); }

 private:
  std::mt19937_64 engine_;
};

struct SceneObject {
  Box start;                  // score ignored
  double vx = 0.0, vy = 0.0;  // px / frame
  int first_frame = 0;
  int last_frame = -1;        // -1: until the end
};

struct SceneSpec {
  std::string video = "synth";
  int width = 320;
  int height = 240;
  int frames = 30;
  std::vector<SceneObject> objects;
  double jitter = 0.0;  // fraction of box size
  int decoys = 0;       // per frame
  std::uint64_t seed = 1;

  nlohmann::json to_json() const;
  static SceneSpec from_json(const nlohmann::json& j);
};

// Who produced a proposal: an object index, or -1 for a decoy.
struct ProposalOrigin {
  int frame = 0;
  int box_index = 0;  // index in the frame's sorted proposal list
  int object = -1;
};

struct Scene {
  SceneSpec spec;
  std::vector<ProposalRecord> records;  // raw scores, file order
  std::vector<FrameProposals> frames;   // normalized, all boxes kept
  std::vector<FlowField> flows;         // frames - 1 fields
  std::vector<Track> ground_truth;      // one per object, id = object index
  std::vector<ProposalOrigin> origins;  // one per proposal in `frames`

  int origin_of(int frame, int box_index) const;
};

// Object boxes move by their velocity every frame. Proposals are the
// ground-truth boxes with x, y, w, h each perturbed uniformly within
// +-jitter * size, plus `decoys` uniformly random boxes per frame. Flow is
// the exact object displacement on pixels inside an object (later objects
// painted over earlier ones), zero elsewhere.
Scene generate_scene(const SceneSpec& spec);

// A scene with `moving` objects and `logos` static ones placed at random,
// sized and oriented so every object stays in frame.
SceneSpec random_scene_spec(std::uint64_t seed, int moving, int logos, int frames, double jitter,
                            int decoys, int width = 320, int height = 240);

// Per-frame mean IoU of `pred` over the frames of `gt`, 0 where pred is absent.
double coverage(const Track& pred, const Track& gt);

// Fraction of ground-truth tracks covered by some prediction with
// coverage > iou_thresh. 0 for an empty ground truth.
double temporal_recall(std::span<const Track> predicted, std::span<const Track> ground_truth,
                       double iou_thresh);

// Deliberately naive re-implementation of build_tracks used as an
// equivalence oracle. Same contract, no shared code path.
std::vector<Track> oracle_build_tracks(std::span<const FrameProposals> frames,
                                       const FlowProvider& flows, const BuilderConfig& cfg);

// Near-one-hot vectors for boxes produced by objects, near-uniform for decoys.
std::vector<ProbVector> plant_probabilities(const Scene& scene, int classes, std::uint64_t seed);

}  // namespace trackforge
