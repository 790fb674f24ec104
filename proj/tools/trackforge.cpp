// trackforge: link per-frame object proposals into ranked spatio-temporal
// tracks and score them by classifier entropy.
//
// Exit codes: 0 success, 1 usage or I/O error, 2 malformed input,
// 3 missing optical flow, 4 missing probability records.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "trackforge/entropy.hpp"
#include "trackforge/error.hpp"
#include "trackforge/io.hpp"
#include "trackforge/pipeline.hpp"
#include "trackforge/render.hpp"
#include "trackforge/synth.hpp"

namespace fs = std::filesystem;
using namespace trackforge;

namespace {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kParse = 2,
  kMissingFlow = 3,
  kMissingProbs = 4,
};

struct MissingProbabilities : Error {
  using Error::Error;
};

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

// ---- build ------------------------------------------------------------------

struct BuildOptions {
  fs::path proposals;
  fs::path flow_dir;
  bool zero_flow = false;
  fs::path out;
  PipelineConfig cfg;
  int jobs = 1;
};

int run_build(const BuildOptions& opt) {
  PipelineConfig cfg = opt.cfg;
  cfg.builder.validate();
  cfg.suppression.validate();
  cfg.rank.validate();

  if (!opt.zero_flow) {
    if (opt.flow_dir.empty()) {
      std::cerr << "trackforge: missing flow: pass --flow-dir or --zero-flow\n";
      return kMissingFlow;
    }
    if (!fs::is_directory(opt.flow_dir)) {
      std::cerr << "trackforge: flow directory " << opt.flow_dir << " not found\n";
      return kMissingFlow;
    }
  }
  cfg.static_filter = !opt.zero_flow;

  const auto frames = load_proposals(opt.proposals, cfg.builder.top_k);
  const auto videos = group_by_video(frames);

  std::vector<std::vector<Track>> results(videos.size());
  std::vector<std::exception_ptr> errors(videos.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t v = next++; v < videos.size(); v = next++) {
      try {
        std::unique_ptr<FlowProvider> flows;
        if (opt.zero_flow) {
          flows = std::make_unique<ZeroFlow>();
        } else {
          const fs::path per_video = opt.flow_dir / videos[v].front().video_id;
          flows = std::make_unique<DirectoryFlow>(fs::is_directory(per_video) ? per_video : opt.flow_dir);
        }
        results[v] = run_pipeline(videos[v], *flows, cfg);
      } catch (...) {
        errors[v] = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(videos.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<Track> all;
  for (auto& r : results) all.insert(all.end(), r.begin(), r.end());
  ensure_parent(opt.out);
  write_tracks(all, opt.out);

  RunManifest m;
  m.command = "build";
  m.builder = cfg.builder;
  m.suppression = cfg.suppression;
  m.rank = cfg.rank;
  m.add_input(opt.proposals);
  if (opt.zero_flow) {
    m.notes["flow"] = "zero";
    m.notes["static_filter"] = "skipped (zero flow)";
  } else {
    m.add_input(opt.flow_dir);
    m.notes["flow"] = "directory";
  }
  m.notes["videos"] = std::to_string(videos.size());
  m.notes["tracks"] = std::to_string(all.size());
  m.write(manifest_path(opt.out));
  std::cout << all.size() << " tracks from " << videos.size() << " video(s) -> " << opt.out.string()
            << "\n";
  return kOk;
}

// ---- eval-entropy -----------------------------------------------------------

struct EvalOptions {
  fs::path tracks;
  fs::path probs;
  fs::path out;
  fs::path class_map;
  int top = 25;
  double log_base = std::exp(1.0);
};

int run_eval(const EvalOptions& opt) {
  if (opt.top < 1) throw InvalidArgument("--top must be >= 1");
  auto tracks = load_tracks(opt.tracks);
  const auto probs = load_probabilities(opt.probs);
  std::map<BoxRef, const ProbVector*> index;
  for (const ProbVector& p : probs) index[p.ref] = &p;

  std::map<std::string, std::string> classes;
  if (!opt.class_map.empty()) {
    std::ifstream in(opt.class_map);
    if (!in) throw ParseError("cannot open class map " + opt.class_map.string());
    std::string video, label;
    while (in >> video >> label) classes[video] = label;
  }

  std::vector<std::string> order;
  std::map<std::string, std::vector<Track>> by_video;
  for (Track& t : tracks) {
    auto [it, fresh] = by_video.try_emplace(t.video);
    if (fresh) order.push_back(t.video);
    it->second.push_back(std::move(t));
  }

  std::vector<ProbVector> selection;
  for (const std::string& video : order) {
    auto& vt = by_video[video];
    sort_by_rank(vt);
    if (static_cast<int>(vt.size()) < opt.top) {
      std::cerr << "trackforge: warning: video '" << video << "' has " << vt.size()
                << " tracks, fewer than --top " << opt.top << "; evaluating all\n";
    }
    const std::size_t n = std::min(vt.size(), static_cast<std::size_t>(opt.top));
    for (std::size_t k = 0; k < n; ++k) {
      const TrackEntry& rep = track_representative(vt[k]);
      const BoxRef ref{video, rep.frame, rep.box_index};
      auto it = index.find(ref);
      if (it == index.end()) {
        throw MissingProbabilities("no probability record for video '" + video + "' frame " +
                                   std::to_string(rep.frame) + " box " + std::to_string(rep.box_index));
      }
      selection.push_back(*it->second);
    }
  }
  if (selection.empty()) throw EmptySelection();

  GroupKey group;
  if (!classes.empty()) {
    group = [&classes](const BoxRef& r) {
      auto it = classes.find(r.video);
      return it == classes.end() ? std::string("unlabeled") : it->second;
    };
  }
  const EntropyReport report = evaluate(selection, opt.log_base, group);

  RunManifest m;
  m.command = "eval-entropy";
  m.log_base = opt.log_base;
  m.add_input(opt.tracks);
  m.add_input(opt.probs);
  if (!opt.class_map.empty()) m.add_input(opt.class_map);
  m.notes["top"] = std::to_string(opt.top);

  nlohmann::json j = report_to_json(report);
  j["manifest"] = m.to_json();
  if (!opt.out.empty()) {
    ensure_parent(opt.out);
    std::ofstream out(opt.out, std::ios::trunc);
    if (!out) throw Error("cannot open " + opt.out.string() + " for writing");
    out << j.dump(2) << '\n';
    m.write(manifest_path(opt.out));
  }
  std::cout << "mean entropy " << report.mean << " over " << report.count << " representative(s)\n";
  return kOk;
}

// ---- render -----------------------------------------------------------------

struct RenderOptions {
  fs::path tracks;
  fs::path frames_dir;
  fs::path out_dir;
  std::string video;
  int width = 640;
  int height = 480;
  int frames = -1;
};

int run_render(const RenderOptions& opt) {
  auto tracks = load_tracks(opt.tracks);
  if (!opt.video.empty()) {
    std::erase_if(tracks, [&](const Track& t) { return t.video != opt.video; });
  }
  int count = opt.frames;
  if (count < 0) {
    count = 0;
    for (const Track& t : tracks) count = std::max(count, t.last_frame() + 1);
    if (!opt.frames_dir.empty()) {
      while (fs::exists(opt.frames_dir / flow_path("", count).replace_extension(".ppm"))) ++count;
    }
  }
  fs::create_directories(opt.out_dir);
  for (int f = 0; f < count; ++f) {
    const fs::path name = flow_path("", f).replace_extension(".ppm");
    Canvas canvas;
    if (!opt.frames_dir.empty() && fs::exists(opt.frames_dir / name)) {
      canvas = read_ppm(opt.frames_dir / name);
    } else {
      canvas = Canvas(opt.width, opt.height, {32, 32, 32});
    }
    draw_tracks(canvas, tracks, f);
    write_ppm(canvas, opt.out_dir / name);
  }
  std::cout << count << " frame(s) -> " << opt.out_dir.string() << "\n";
  return kOk;
}

// ---- synth ------------------------------------------------------------------

struct SynthOptions {
  fs::path scene;
  fs::path out_dir;
  int objects = 3;
  int logos = 1;
  int frames = 60;
  double jitter = 0.1;
  int decoys = 10;
  int width = 320;
  int height = 240;
  std::uint64_t seed = 1;
  int classes = 1000;
};

int run_synth(SynthOptions opt) {
  if (const char* env = std::getenv("TRACKFORGE_SEED")) {
    try {
      opt.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw InvalidArgument("TRACKFORGE_SEED must be an unsigned integer");
    }
  }
  SceneSpec spec;
  if (!opt.scene.empty()) {
    std::ifstream in(opt.scene);
    if (!in) throw ParseError("cannot open scene " + opt.scene.string());
    try {
      spec = SceneSpec::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("scene: ") + e.what());
    }
    if (std::getenv("TRACKFORGE_SEED")) spec.seed = opt.seed;
  } else {
    spec = random_scene_spec(opt.seed, opt.objects, opt.logos, opt.frames, opt.jitter, opt.decoys,
                             opt.width, opt.height);
  }
  const Scene scene = generate_scene(spec);

  fs::create_directories(opt.out_dir / "flow");
  {
    std::ofstream out(opt.out_dir / "scene.json", std::ios::trunc);
    out << spec.to_json().dump(2) << '\n';
  }
  {
    std::ofstream out(opt.out_dir / "proposals.txt", std::ios::trunc);
    out << "# video frame x y w h score\n";
    write_proposal_records(scene.records, out);
  }
  for (const FlowField& f : scene.flows) write_flow(f, flow_path(opt.out_dir / "flow", f.frame_index));
  write_tracks(scene.ground_truth, opt.out_dir / "ground_truth.jsonl");
  if (opt.classes > 0) {
    write_probabilities(plant_probabilities(scene, opt.classes, spec.seed), opt.out_dir / "probs.txt");
  }
  std::cout << "scene '" << spec.video << "': " << scene.records.size() << " proposals over "
            << spec.frames << " frames -> " << opt.out_dir.string() << "\n";
  return kOk;
}

// ---- rank / nms -------------------------------------------------------------

int run_rank(const fs::path& in, const fs::path& out, double lambda) {
  auto tracks = rank_tracks(load_tracks(in), lambda);
  ensure_parent(out);
  write_tracks(tracks, out);
  RunManifest m;
  m.command = "rank";
  m.rank.lambda = lambda;
  m.add_input(in);
  m.write(manifest_path(out));
  return kOk;
}

int run_nms(const fs::path& in, const fs::path& out, double threshold) {
  SuppressionConfig{threshold, 1, 0.0}.validate();
  auto tracks = temporal_nms(load_tracks(in), threshold);
  ensure_parent(out);
  write_tracks(tracks, out);
  RunManifest m;
  m.command = "nms";
  m.suppression.nms_viou = threshold;
  m.add_input(in);
  m.write(manifest_path(out));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trackforge: spatio-temporal object proposals from per-frame boxes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  BuildOptions build;
  auto* cmd_build = app.add_subcommand("build", "Link proposals into suppressed, ranked tracks");
  cmd_build->add_option("proposals", build.proposals, "Proposal file")->required()->check(CLI::ExistingFile);
  auto* flow_opt = cmd_build->add_option("--flow-dir", build.flow_dir, "Directory of %06d.tflo flow files");
  cmd_build->add_flag("--zero-flow", build.zero_flow, "Assume zero motion (disables the static filter)")
      ->excludes(flow_opt);
  cmd_build->add_option("-o,--out", build.out, "Output tracks file")->required();
  cmd_build->add_option("--iou-thresh", build.cfg.builder.theta_tau, "Match IoU threshold")->capture_default_str();
  cmd_build->add_option("--ttl", build.cfg.builder.gamma, "Initial / maximum time to live")->capture_default_str();
  cmd_build->add_option("--top-k", build.cfg.builder.top_k, "Proposals kept per frame")->capture_default_str();
  cmd_build->add_option("--min-length", build.cfg.suppression.min_length, "Minimum track length")
      ->capture_default_str();
  cmd_build->add_option("--static-thresh", build.cfg.suppression.static_thresh,
                        "Minimum mean flow magnitude (px/frame)")
      ->capture_default_str();
  cmd_build->add_option("--lambda", build.cfg.rank.lambda, "Weight of the proposal score in the rank")
      ->capture_default_str();
  cmd_build->add_option("--nms", build.cfg.suppression.nms_viou, "Temporal NMS vIoU threshold")
      ->capture_default_str();
  cmd_build->add_option("-j,--jobs", build.jobs, "Videos processed in parallel")->capture_default_str();

  EvalOptions eval;
  auto* cmd_eval = app.add_subcommand("eval-entropy", "Mean classifier entropy of top track representatives");
  cmd_eval->add_option("tracks", eval.tracks, "Tracks file")->required()->check(CLI::ExistingFile);
  cmd_eval->add_option("probs", eval.probs, "Probability file (NPROB format)")->required()->check(CLI::ExistingFile);
  cmd_eval->add_option("--top", eval.top, "Tracks evaluated per video")->capture_default_str();
  cmd_eval->add_option("-o,--out", eval.out, "Report file (JSON)");
  cmd_eval->add_option("--log-base", eval.log_base, "Logarithm base (default e)");
  cmd_eval->add_option("--class-map", eval.class_map, "Lines 'video class' for per-class means");

  RenderOptions render;
  auto* cmd_render = app.add_subcommand("render", "Draw tracks onto frames as PPM images");
  cmd_render->add_option("tracks", render.tracks, "Tracks file")->required()->check(CLI::ExistingFile);
  cmd_render->add_option("-o,--out-dir", render.out_dir, "Output directory")->required();
  cmd_render->add_option("--frames-dir", render.frames_dir, "Directory of %06d.ppm frames");
  cmd_render->add_option("--video", render.video, "Only draw tracks of this video");
  cmd_render->add_option("--width", render.width, "Blank canvas width")->capture_default_str();
  cmd_render->add_option("--height", render.height, "Blank canvas height")->capture_default_str();
  cmd_render->add_option("--frames", render.frames, "Number of frames (default: from tracks)");

  SynthOptions synth;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic scene with proposals and flow");
  cmd_synth->add_option("-o,--out-dir", synth.out_dir, "Output directory")->required();
  cmd_synth->add_option("--scene", synth.scene, "Scene description (JSON)")->check(CLI::ExistingFile);
  cmd_synth->add_option("--objects", synth.objects)->capture_default_str();
  cmd_synth->add_option("--logos", synth.logos)->capture_default_str();
  cmd_synth->add_option("--frames", synth.frames)->capture_default_str();
  cmd_synth->add_option("--jitter", synth.jitter)->capture_default_str();
  cmd_synth->add_option("--decoys", synth.decoys)->capture_default_str();
  cmd_synth->add_option("--width", synth.width)->capture_default_str();
  cmd_synth->add_option("--height", synth.height)->capture_default_str();
  cmd_synth->add_option("--seed", synth.seed, "Overridden by TRACKFORGE_SEED")->capture_default_str();
  cmd_synth->add_option("--classes", synth.classes, "Classes of planted probabilities, 0 to skip")
      ->capture_default_str();

  fs::path rank_in, rank_out;
  double rank_lambda = 0.5;
  auto* cmd_rank = app.add_subcommand("rank", "Rescore and sort a tracks file");
  cmd_rank->add_option("tracks", rank_in)->required()->check(CLI::ExistingFile);
  cmd_rank->add_option("-o,--out", rank_out)->required();
  cmd_rank->add_option("--lambda", rank_lambda)->capture_default_str();

  fs::path nms_in, nms_out;
  double nms_thresh = 0.5;
  auto* cmd_nms = app.add_subcommand("nms", "Temporal NMS on a scored tracks file");
  cmd_nms->add_option("tracks", nms_in)->required()->check(CLI::ExistingFile);
  cmd_nms->add_option("-o,--out", nms_out)->required();
  cmd_nms->add_option("--nms", nms_thresh)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*cmd_build) return run_build(build);
    if (*cmd_eval) return run_eval(eval);
    if (*cmd_render) return run_render(render);
    if (*cmd_synth) return run_synth(synth);
    if (*cmd_rank) return run_rank(rank_in, rank_out, rank_lambda);
    if (*cmd_nms) return run_nms(nms_in, nms_out, nms_thresh);
  } catch (const MissingFlow& e) {
    std::cerr << "trackforge: missing flow: " << e.what() << "\n";
    return kMissingFlow;
  } catch (const MissingProbabilities& e) {
    std::cerr << "trackforge: " << e.what() << "\n";
    return kMissingProbs;
  } catch (const ParseError& e) {
    std::cerr << "trackforge: parse error: " << e.what() << "\n";
    return kParse;
  } catch (const std::exception& e) {
    std::cerr << "trackforge: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
