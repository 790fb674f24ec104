#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "trackforge/error.hpp"
#include "trackforge/io.hpp"
#include "trackforge/synth.hpp"
#include "trackforge/track_builder.hpp"

using namespace trackforge;
using namespace trackforge::testing;

namespace {

std::vector<FrameProposals> parse(const std::string& text, int top_k = 25) {
  std::istringstream in(text);
  return frames_from_records(parse_proposal_records(in), top_k);
}

}  // namespace

TEST_CASE("score normalization") {
  const auto single = parse("v 0 1 2 3 4 7.3\n");
  REQUIRE(single.size() == 1);
  CHECK(single[0].boxes[0].score == 1.0);
  CHECK(single[0].boxes[0] == Box{1, 2, 3, 4, 1.0});

  const auto three = parse("v 0 0 0 5 5 4\nv 0 0 0 5 5 2\nv 1 0 0 5 5 6\n");
  REQUIRE(three.size() == 2);
  CHECK(three[0].boxes[0].score == 0.5);
  CHECK(three[0].boxes[1].score == 0.0);
  CHECK(three[1].boxes[0].score == 1.0);
  CHECK(three[0].raw_score_range == std::pair{2.0, 6.0});
}

TEST_CASE("normalization is per video and monotone") {
  Rng rng(2);
  std::ostringstream text;
  for (int f = 0; f < 5; ++f) {
    for (int k = 0; k < 6; ++k) text << "a " << f << " 0 0 5 5 " << rng.uniform(-3, 9) << "\n";
    for (int k = 0; k < 3; ++k) text << "b " << f << " 0 0 5 5 " << rng.uniform(100, 200) << "\n";
  }
  const auto frames = parse(text.str(), 4);
  const auto videos = group_by_video(frames);
  REQUIRE(videos.size() == 2);
  CHECK(videos[0][0].video_id == "a");
  for (const auto& video : videos) {
    double lo = 1, hi = 0;
    for (const auto& fp : video) {
      CHECK(fp.boxes.size() <= 4);
      for (std::size_t k = 1; k < fp.boxes.size(); ++k) CHECK(fp.boxes[k - 1].score >= fp.boxes[k].score);
      for (const Box& b : fp.boxes) {
        lo = std::min(lo, b.score);
        hi = std::max(hi, b.score);
      }
    }
    CHECK(hi == 1.0);
    CHECK(lo >= 0.0);
  }
}

TEST_CASE("proposal parse errors") {
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("# only a comment\n"), ParseError);
  CHECK_THROWS_AS(parse("v 0 0 0 5\n"), ParseError);
  CHECK_THROWS_AS(parse("v 0 0 0 0 5 1\n"), ParseError);
  CHECK_THROWS_AS(parse("v x 0 0 5 5 1\n"), ParseError);
  try {
    parse("v 1 0 0 5 5 1\nw 0 0 0 5 5 1\nv 0 0 0 5 5 1\n");
    FAIL("expected NonMonotonicFrames");
  } catch (const NonMonotonicFrames& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("load_proposals from disk") {
  const auto path = std::filesystem::temp_directory_path() / "trackforge_props.txt";
  std::ofstream(path) << "# video frame x y w h score\nclip 0 1 1 4 4 0.5\nclip 0 2 2 4 4 0.9\nclip 2 1 1 4 4 0.1\n";
  const auto frames = load_proposals(path, 1);
  REQUIRE(frames.size() == 2);
  CHECK(frames[0].boxes.size() == 1);
  CHECK(frames[0].boxes[0].x == 2);
  CHECK(frames[1].frame == 2);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_proposals(path), ParseError);
}

TEST_CASE("track files round trip") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Scene scene = generate_scene(random_scene_spec(seed, 2, 1, 15, 0.2, 3, 80, 60));
    auto tracks = build_tracks(scene.frames, FieldFlow(scene.flows), {0.3, 3, 10});
    for (Track& t : tracks) t.rank_score = 0.1 * t.id + 1.0 / 3.0;
    std::stringstream ss;
    write_tracks(tracks, ss);
    CHECK(parse_tracks(ss) == tracks);
  }
}

TEST_CASE("hand-built track fixture") {
  std::istringstream in(
      R"({"id":4,"video":"v","e_score":0.5,"i_score":0.75,"rank_score":0.625,"entries":[)"
      R"({"frame":2,"box":[0,0,10,10],"score":0.5,"provenance":"matched","box_index":1,"match_iou":null},)"
      R"({"frame":3,"box":[1,0,10,10],"score":0,"provenance":"interpolated","box_index":-1,"match_iou":null},)"
      R"({"frame":4,"box":[2,0,10,10],"score":0.5,"provenance":"matched","box_index":0,"match_iou":0.75}]})"
      "\n"
      R"({"id":9,"video":"v","e_score":1,"i_score":0,"rank_score":0.5,"entries":[)"
      R"({"frame":0,"box":[5,5,2,2],"score":1,"provenance":"matched","box_index":0,"match_iou":null}]})"
      "\n");
  const auto tracks = parse_tracks(in);
  REQUIRE(tracks.size() == 2);
  CHECK(tracks[0].id == 4);
  CHECK(tracks[0].length() == 3);
  CHECK(tracks[0].entries[1].provenance == Provenance::Interpolated);
  CHECK(*tracks[0].entries[2].match_iou == 0.75);
  CHECK(tracks[0].rank_score == 0.625);
  CHECK(tracks[1].id == 9);
  CHECK(tracks[1].entries[0].box == Box{5, 5, 2, 2, 1});
}

TEST_CASE("malformed track files") {
  const std::string gap =
      R"({"id":0,"video":"v","e_score":1,"i_score":1,"rank_score":1,"entries":[)"
      R"({"frame":0,"box":[0,0,1,1],"score":1,"provenance":"matched","box_index":0,"match_iou":null},)"
      R"({"frame":2,"box":[0,0,1,1],"score":1,"provenance":"matched","box_index":0,"match_iou":1}]})";
  std::istringstream gapped(gap + "\n");
  CHECK_THROWS_AS(parse_tracks(gapped), ParseError);

  const std::string dangling =
      R"({"id":0,"video":"v","e_score":1,"i_score":1,"rank_score":1,"entries":[)"
      R"({"frame":0,"box":[0,0,1,1],"score":1,"provenance":"matched","box_index":0,"match_iou":null},)"
      R"({"frame":1,"box":[0,0,1,1],"score":0,"provenance":"interpolated","box_index":-1,"match_iou":null}]})";
  std::istringstream tail("\n" + dangling + "\n");
  try {
    parse_tracks(tail);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::istringstream junk("{not json\n");
  CHECK_THROWS_AS(parse_tracks(junk), ParseError);
}

TEST_CASE("entropy report round trip") {
  std::vector<ProbVector> probs = {{{"a", 0, 0}, {0.2, 0.8}}, {{"b", 3, 2}, {0.5, 0.5}}};
  const auto report = evaluate(probs);
  const auto j = report_to_json(report);
  CHECK(report_from_json(nlohmann::json::parse(j.dump())) == report);
  CHECK(j["group_means"].size() == 2);
}

TEST_CASE("manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "trackforge_manifest";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "in.txt") << "abc";
  RunManifest m;
  m.command = "build";
  m.builder.gamma = 7;
  m.rank.lambda = 0.25;
  m.add_input(dir / "in.txt");
  CHECK(m.inputs[0].sha256 == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  m.notes["flow"] = "zero";
  const RunManifest back = RunManifest::from_json(m.to_json());
  CHECK(back.builder.gamma == 7);
  CHECK(back.rank.lambda == 0.25);
  CHECK(back.inputs == m.inputs);
  CHECK(back.notes == m.notes);
  CHECK(manifest_path("out/tracks.jsonl") == "out/tracks.jsonl.manifest.json");
  std::filesystem::remove_all(dir);
}
