#include <doctest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "golden.hpp"
#include "trackforge/entropy.hpp"
#include "trackforge/io.hpp"
#include "trackforge/render.hpp"

namespace fs = std::filesystem;
using namespace trackforge;

namespace {

const fs::path kData = TRACKFORGE_TEST_DATA;

// Fresh scratch directory per test case.
fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(TRACKFORGE_SCRATCH) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = quote(TRACKFORGE_CLI) + " " + args + " >" + quote(log) + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

std::vector<int> ids(const std::vector<Track>& tracks) {
  std::vector<int> out;
  for (const Track& t : tracks) out.push_back(t.id);
  return out;
}

void write_probs(const fs::path& path, const std::vector<ProbVector>& rows) {
  write_probabilities(std::span<const ProbVector>(rows), path);
}

// Builds the two-object mixed fixture with zero flow.
fs::path build_mixed(const fs::path& dir, const std::string& extra = "") {
  const fs::path out = dir / "tracks.jsonl";
  REQUIRE(cli("build " + quote(kData / "mixed_proposals.txt") + " --zero-flow --min-length 5 -o " +
                  quote(out) + " " + extra,
              dir / "build.log") == 0);
  return out;
}

}  // namespace

TEST_CASE("cli golden: synth + build reproduces the oracle tracks") {
  const fs::path dir = scratch("golden");
  REQUIRE(cli("synth --scene " + quote(kData / "fixture_scene.json") + " --classes 0 -o " + quote(dir),
              dir / "synth.log") == 0);
  REQUIRE(cli("build " + quote(dir / "proposals.txt") + " --flow-dir " + quote(dir / "flow") + " -o " +
                  quote(dir / "tracks.jsonl"),
              dir / "build.log") == 0);

  const auto golden = load_tracks(kData / "golden_tracks.jsonl");
  REQUIRE(golden.size() >= 2);
  CHECK(load_tracks(dir / "tracks.jsonl") == golden);
  // The committed file is what the oracle produces today.
  CHECK(testing::golden_tracks(kData / "fixture_scene.json") == golden);

  const auto manifest = read_json(manifest_path(dir / "tracks.jsonl"));
  CHECK(manifest.at("command") == "build");
  // The proposal file plus one digest per flow file.
  const auto flow_files = std::distance(fs::directory_iterator(dir / "flow"), fs::directory_iterator{});
  CHECK(flow_files == 23);
  CHECK(manifest.at("inputs").size() == static_cast<std::size_t>(1 + flow_files));
}

TEST_CASE("cli build: lambda changes the order of the mixed fixture") {
  const fs::path dir = scratch("lambda");
  const auto by_score = load_tracks(build_mixed(dir, "--lambda 1"));
  const auto by_consistency = load_tracks(build_mixed(dir, "--lambda 0"));
  REQUIRE(by_score.size() == 2);
  REQUIRE(by_consistency.size() == 2);
  // Object A has the higher proposal score, object B never moves.
  CHECK(by_score[0].entries[0].box.x < 50);
  CHECK(by_consistency[0].entries[0].box.x == 100);
  CHECK(ids(by_score) != ids(by_consistency));
}

TEST_CASE("cli exit codes") {
  const fs::path dir = scratch("exit");
  const fs::path log = dir / "log";

  SUBCASE("usage") {
    CHECK(cli("build --no-such-flag", log) == 1);
    CHECK(cli("", log) == 1);
  }
  SUBCASE("parse error") {
    std::ofstream(dir / "bad.txt") << "v 0 1 2 three 4 0.5\n";
    CHECK(cli("build " + quote(dir / "bad.txt") + " --zero-flow -o " + quote(dir / "t.jsonl"), log) == 2);
    CHECK(slurp(log).find("line 1") != std::string::npos);
    std::ofstream(dir / "bad_tracks.jsonl") << "{not json\n";
    CHECK(cli("rank " + quote(dir / "bad_tracks.jsonl") + " -o " + quote(dir / "r.jsonl"), log) == 2);
  }
  SUBCASE("missing flow") {
    const fs::path props = kData / "mixed_proposals.txt";
    CHECK(cli("build " + quote(props) + " -o " + quote(dir / "t.jsonl"), log) == 3);
    fs::create_directories(dir / "empty_flow");
    CHECK(cli("build " + quote(props) + " --flow-dir " + quote(dir / "empty_flow") + " -o " +
                  quote(dir / "t.jsonl"),
              log) == 3);
    CHECK(cli("build " + quote(props) + " --flow-dir " + quote(dir / "nowhere") + " -o " +
                  quote(dir / "t.jsonl"),
              log) == 3);
  }
  SUBCASE("missing probabilities") {
    const fs::path tracks = build_mixed(dir);
    write_probs(dir / "p.txt", {{{"other", 0, 0}, {0.5, 0.5}}});
    CHECK(cli("eval-entropy " + quote(tracks) + " " + quote(dir / "p.txt"), log) == 4);
  }
}

TEST_CASE("cli eval-entropy") {
  const fs::path dir = scratch("entropy");
  const fs::path tracks = build_mixed(dir);
  const fs::path report = dir / "report.json";

  auto rows = [](auto fill) {
    std::vector<ProbVector> out;
    for (int f = 0; f < 12; ++f) {
      for (int b = 0; b < 2; ++b) out.push_back({{"mixed", f, b}, fill()});
    }
    return out;
  };

  SUBCASE("one-hot gives zero, and fewer than N tracks still succeeds") {
    write_probs(dir / "p.txt", rows([] {
                  std::vector<double> p(1000, 0.0);
                  p[3] = 1.0;
                  return p;
                }));
    REQUIRE(cli("eval-entropy " + quote(tracks) + " " + quote(dir / "p.txt") + " -o " + quote(report),
                dir / "log") == 0);
    CHECK(slurp(dir / "log").find("warning") != std::string::npos);
    const auto j = read_json(report);
    CHECK(j.at("mean").get<double>() == 0.0);
    CHECK(j.at("count") == 2);
    CHECK(j.contains("manifest"));
  }
  SUBCASE("uniform over 1000 classes") {
    write_probs(dir / "p.txt", rows([] { return std::vector<double>(1000, 1.0 / 1000); }));
    REQUIRE(cli("eval-entropy " + quote(tracks) + " " + quote(dir / "p.txt") + " -o " + quote(report),
                dir / "log") == 0);
    CHECK(std::abs(read_json(report).at("mean").get<double>() - 6.907755) <= 1e-6);
  }
  SUBCASE("log base and --top") {
    write_probs(dir / "p.txt", rows([] { return std::vector<double>(1000, 1.0 / 1000); }));
    REQUIRE(cli("eval-entropy " + quote(tracks) + " " + quote(dir / "p.txt") + " --top 1 --log-base 10 -o " +
                    quote(report),
                dir / "log") == 0);
    const auto j = read_json(report);
    CHECK(j.at("count") == 1);
    CHECK(j.at("mean").get<double>() == doctest::Approx(3.0).epsilon(1e-12));
  }
}

TEST_CASE("cli contract: checked-in probability sample") {
  const auto probs = load_probabilities(kData / "sample_probs.txt");
  REQUIRE(probs.size() == 3);
  for (const ProbVector& p : probs) {
    CHECK(p.probs.size() == 1000);
    CHECK_NOTHROW(validate_distribution(p.probs));
  }
  const fs::path dir = scratch("contract");
  const fs::path tracks = build_mixed(dir);
  const fs::path report = dir / "report.json";
  REQUIRE(cli("eval-entropy " + quote(tracks) + " " + quote(kData / "sample_probs.txt") + " -o " + quote(report),
              dir / "log") == 0);
  // Representatives are frame 0 of each track: one one-hot row, one uniform row.
  CHECK(read_json(report).at("mean").get<double>() == doctest::Approx(std::log(1000.0) / 2).epsilon(1e-12));
}

TEST_CASE("cli render") {
  const fs::path dir = scratch("render");

  SUBCASE("empty track set gives blank canvases") {
    write_tracks(std::vector<Track>{}, dir / "empty.jsonl");
    REQUIRE(cli("render " + quote(dir / "empty.jsonl") + " --frames 3 --width 32 --height 24 -o " +
                    quote(dir / "out"),
                dir / "log") == 0);
    for (int f = 0; f < 3; ++f) {
      const Canvas c = read_ppm(dir / "out" / flow_path("", f).replace_extension(".ppm"));
      CHECK(c.width == 32);
      CHECK(c.height == 24);
      CHECK(std::all_of(c.pixels.begin(), c.pixels.end(), [&](const Rgb& p) { return p == c.pixels[0]; }));
    }
    CHECK_FALSE(fs::exists(dir / "out" / "000003.ppm"));
  }
  SUBCASE("output is byte-identical across runs") {
    const fs::path tracks = build_mixed(dir);
    REQUIRE(cli("render " + quote(tracks) + " -o " + quote(dir / "a"), dir / "log") == 0);
    REQUIRE(cli("render " + quote(tracks) + " -o " + quote(dir / "b"), dir / "log") == 0);
    int files = 0;
    for (const auto& e : fs::directory_iterator(dir / "a")) {
      CHECK(slurp(e.path()) == slurp(dir / "b" / e.path().filename()));
      ++files;
    }
    CHECK(files == 12);
  }
  SUBCASE("boxes outside the canvas are clipped") {
    Track t;
    t.id = 1;
    t.video = "v";
    t.entries = {{0, {-10, -10, 20, 20, 1}, Provenance::Matched, std::nullopt, 0},
                 {1, {50, 50, 10, 10, 1}, Provenance::Matched, 1.0, 0}};
    write_tracks(std::vector<Track>{t}, dir / "t.jsonl");
    REQUIRE(cli("render " + quote(dir / "t.jsonl") + " --width 16 --height 16 -o " + quote(dir / "out"),
                dir / "log") == 0);
    const Canvas f0 = read_ppm(dir / "out" / "000000.ppm");
    const Canvas f1 = read_ppm(dir / "out" / "000001.ppm");
    const Rgb background = f1.pixels[0];
    CHECK(std::all_of(f1.pixels.begin(), f1.pixels.end(), [&](const Rgb& p) { return p == background; }));
    // Only the right and bottom edges of the first box (near x,y = 10) are on the canvas.
    CHECK(f0.at(0, 0) == background);
    CHECK(f0.at(15, 15) == background);
    bool right_edge = false, bottom_edge = false;
    for (int k = 8; k <= 10; ++k) {
      right_edge = right_edge || !(f0.at(k, 0) == background);
      bottom_edge = bottom_edge || !(f0.at(0, k) == background);
    }
    CHECK(right_edge);
    CHECK(bottom_edge);
  }
}

TEST_CASE("cli rank and nms") {
  const fs::path dir = scratch("rank");
  const fs::path tracks = build_mixed(dir);

  REQUIRE(cli("rank " + quote(tracks) + " --lambda 1 -o " + quote(dir / "r1.jsonl"), dir / "log") == 0);
  REQUIRE(cli("rank " + quote(tracks) + " --lambda 0 -o " + quote(dir / "r0.jsonl"), dir / "log") == 0);
  const auto r1 = load_tracks(dir / "r1.jsonl");
  const auto r0 = load_tracks(dir / "r0.jsonl");
  CHECK(ids(r1) != ids(r0));
  CHECK(r1[0].rank_score == doctest::Approx(r1[0].e_score));
  CHECK(r0[0].rank_score == doctest::Approx(r0[0].i_score));

  // A copy of the top track with a new id is a full temporal duplicate.
  auto dup = r1;
  Track copy = r1[0];
  copy.id = 99;
  copy.rank_score -= 0.01;
  dup.push_back(copy);
  write_tracks(dup, dir / "dup.jsonl");
  REQUIRE(cli("nms " + quote(dir / "dup.jsonl") + " --nms 0.5 -o " + quote(dir / "n.jsonl"), dir / "log") == 0);
  const auto kept = load_tracks(dir / "n.jsonl");
  CHECK(ids(kept) == ids(r1));
}
