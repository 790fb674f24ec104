#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "trackforge/entropy.hpp"
#include "trackforge/proposals.hpp"
#include "trackforge/ranking.hpp"
#include "trackforge/suppression.hpp"
#include "trackforge/track.hpp"
#include "trackforge/track_builder.hpp"

namespace trackforge {

inline constexpr const char* kToolVersion = "0.3.0";

// One line of a proposal file: video frame x y w h raw_score
struct ProposalRecord {
  std::string video;
  int frame = 0;
  Box box;  // box.score holds the raw score

  friend bool operator==(const ProposalRecord&, const ProposalRecord&) = default;
};

std::vector<ProposalRecord> parse_proposal_records(std::istream& in);
void write_proposal_records(std::span<const ProposalRecord> records, std::ostream& out);

// Min-max normalizes scores per video (constant-score videos map to 1.0),
// sorts each frame best first and keeps at most `top_k` boxes. Output is
// grouped by video in order of first appearance, frames ascending.
// Throws NonMonotonicFrames if a video's frames go backwards in the input.
std::vector<FrameProposals> frames_from_records(std::span<const ProposalRecord> records,
                                                int top_k);

// Throws ParseError (with line number) on malformed or empty input.
std::vector<FrameProposals> load_proposals(const std::filesystem::path& path, int top_k = 25);

// Splits a multi-video sequence into per-video runs, order preserved.
std::vector<std::vector<FrameProposals>> group_by_video(std::span<const FrameProposals> frames);

// One JSON object per line. Loading rejects gapped or malformed tracks.
void write_tracks(std::span<const Track> tracks, std::ostream& out);
void write_tracks(std::span<const Track> tracks, const std::filesystem::path& path);
std::vector<Track> parse_tracks(std::istream& in);
std::vector<Track> load_tracks(const std::filesystem::path& path);

nlohmann::json track_to_json(const Track& t);
Track track_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const EntropyReport& report);
EntropyReport report_from_json(const nlohmann::json& j);

struct InputDigest {
  std::string path;
  std::string sha256;

  friend bool operator==(const InputDigest&, const InputDigest&) = default;
};

struct RunManifest {
  std::string command;
  BuilderConfig builder;
  SuppressionConfig suppression;
  RankConfig rank;
  double log_base = 2.718281828459045;
  std::vector<InputDigest> inputs;
  std::map<std::string, std::string> notes;
  std::string tool_version = kToolVersion;

  // Hashes the file (or every regular file below a directory, in path order).
  void add_input(const std::filesystem::path& path);

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
  void write(const std::filesystem::path& path) const;
};

std::string sha256_hex(const std::filesystem::path& path);

// Path of the manifest written next to an output file.
std::filesystem::path manifest_path(const std::filesystem::path& output);

}  // namespace trackforge
