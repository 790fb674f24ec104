#include "trackforge/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "trackforge/error.hpp"
#include "text_util.hpp"

namespace trackforge {

using nlohmann::json;

std::vector<ProposalRecord> parse_proposal_records(std::istream& in) {
  std::vector<ProposalRecord> out;
  std::unordered_map<std::string, int> last_frame;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = split_fields(line);
    if (f.empty() || f[0].front() == '#') continue;
    if (f.size() != 7) {
      throw ParseError("expected 'video frame x y w h score', got " + std::to_string(f.size()) +
                           " fields",
                       line_no);
    }
    ProposalRecord r;
    r.video = std::string(f[0]);
    r.frame = static_cast<int>(parse_int(f[1], line_no));
    r.box = {parse_double(f[2], line_no), parse_double(f[3], line_no), parse_double(f[4], line_no),
             parse_double(f[5], line_no), parse_double(f[6], line_no)};
    if (r.frame < 0) throw ParseError("negative frame index", line_no);
    if (!(r.box.w > 0.0 && r.box.h > 0.0)) throw ParseError("box width and height must be > 0", line_no);
    auto [it, fresh] = last_frame.try_emplace(r.video, r.frame);
    if (!fresh) {
      if (r.frame < it->second) {
        throw NonMonotonicFrames("frame " + std::to_string(r.frame) + " of video '" + r.video +
                                     "' follows frame " + std::to_string(it->second),
                                 line_no);
      }
      it->second = r.frame;
    }
    out.push_back(std::move(r));
  }
  if (out.empty()) throw ParseError("proposal file contains no records");
  return out;
}

void write_proposal_records(std::span<const ProposalRecord> records, std::ostream& out) {
  for (const ProposalRecord& r : records) {
    out << r.video << ' ' << r.frame << ' ' << format_double(r.box.x) << ' '
        << format_double(r.box.y) << ' ' << format_double(r.box.w) << ' '
        << format_double(r.box.h) << ' ' << format_double(r.box.score) << '\n';
  }
}

std::vector<FrameProposals> frames_from_records(std::span<const ProposalRecord> records,
                                                int top_k) {
  if (top_k < 1) throw InvalidArgument("top_k must be >= 1");
  if (records.empty()) throw ParseError("no proposal records");

  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<const ProposalRecord*>> by_video;
  for (const ProposalRecord& r : records) {
    auto [it, fresh] = by_video.try_emplace(r.video);
    if (fresh) order.push_back(r.video);
    if (!it->second.empty() && r.frame < it->second.back()->frame) {
      throw NonMonotonicFrames("frames of video '" + r.video + "' are not sorted");
    }
    it->second.push_back(&r);
  }

  std::vector<FrameProposals> out;
  for (const std::string& video : order) {
    const auto& recs = by_video[video];
    auto [lo_it, hi_it] = std::minmax_element(
        recs.begin(), recs.end(),
        [](const ProposalRecord* a, const ProposalRecord* b) { return a->box.score < b->box.score; });
    const double lo = (*lo_it)->box.score;
    const double hi = (*hi_it)->box.score;
    const double range = hi - lo;

    for (std::size_t k = 0; k < recs.size();) {
      FrameProposals fp;
      fp.video_id = video;
      fp.frame = recs[k]->frame;
      fp.raw_score_range = {lo, hi};
      for (; k < recs.size() && recs[k]->frame == fp.frame; ++k) {
        Box b = recs[k]->box;
        b.score = range > 0.0 ? (b.score - lo) / range : 1.0;
        fp.boxes.push_back(b);
      }
      std::stable_sort(fp.boxes.begin(), fp.boxes.end(),
                       [](const Box& a, const Box& b) { return a.score > b.score; });
      if (fp.boxes.size() > static_cast<std::size_t>(top_k)) {
        fp.boxes.resize(static_cast<std::size_t>(top_k));
      }
      out.push_back(std::move(fp));
    }
  }
  return out;
}

std::vector<FrameProposals> load_proposals(const std::filesystem::path& path, int top_k) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open proposal file " + path.string());
  const auto records = parse_proposal_records(in);
  return frames_from_records(records, top_k);
}

std::vector<std::vector<FrameProposals>> group_by_video(std::span<const FrameProposals> frames) {
  std::vector<std::vector<FrameProposals>> out;
  std::unordered_map<std::string, std::size_t> index;
  for (const FrameProposals& fp : frames) {
    auto [it, fresh] = index.try_emplace(fp.video_id, out.size());
    if (fresh) out.emplace_back();
    out[it->second].push_back(fp);
  }
  return out;
}

json track_to_json(const Track& t) {
  json entries = json::array();
  for (const TrackEntry& e : t.entries) {
    json je = {{"frame", e.frame},
               {"box", {e.box.x, e.box.y, e.box.w, e.box.h}},
               {"score", e.box.score},
               {"provenance", e.matched() ? "matched" : "interpolated"},
               {"box_index", e.box_index}};
    je["match_iou"] = e.match_iou ? json(*e.match_iou) : json(nullptr);
    entries.push_back(std::move(je));
  }
  return {{"id", t.id},
          {"video", t.video},
          {"e_score", t.e_score},
          {"i_score", t.i_score},
          {"rank_score", t.rank_score},
          {"entries", std::move(entries)}};
}

Track track_from_json(const json& j) {
  Track t;
  t.id = j.at("id").get<int>();
  t.video = j.at("video").get<std::string>();
  t.e_score = j.at("e_score").get<double>();
  t.i_score = j.at("i_score").get<double>();
  t.rank_score = j.at("rank_score").get<double>();
  for (const json& je : j.at("entries")) {
    TrackEntry e;
    e.frame = je.at("frame").get<int>();
    const auto& b = je.at("box");
    if (!b.is_array() || b.size() != 4) throw ParseError("box must have 4 numbers");
    e.box = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>(),
             je.at("score").get<double>()};
    const auto prov = je.at("provenance").get<std::string>();
    if (prov == "matched") {
      e.provenance = Provenance::Matched;
    } else if (prov == "interpolated") {
      e.provenance = Provenance::Interpolated;
    } else {
      throw ParseError("unknown provenance '" + prov + "'");
    }
    e.box_index = je.at("box_index").get<int>();
    if (!je.at("match_iou").is_null()) {
      if (!e.matched()) throw ParseError("interpolated entry carries a match IoU");
      e.match_iou = je.at("match_iou").get<double>();
    }
    if (!(e.box.w > 0.0 && e.box.h > 0.0)) throw ParseError("box width and height must be > 0");
    t.entries.push_back(e);
  }
  if (t.entries.empty()) throw ParseError("track " + std::to_string(t.id) + " has no entries");
  for (std::size_t k = 1; k < t.entries.size(); ++k) {
    if (t.entries[k].frame != t.entries[k - 1].frame + 1) {
      throw ParseError("track " + std::to_string(t.id) + " has a gap at frame " +
                       std::to_string(t.entries[k - 1].frame + 1));
    }
  }
  if (!is_finalized(t)) {
    throw ParseError("track " + std::to_string(t.id) + " must start and end on matched entries");
  }
  return t;
}

void write_tracks(std::span<const Track> tracks, std::ostream& out) {
  for (const Track& t : tracks) out << track_to_json(t).dump() << '\n';
}

void write_tracks(std::span<const Track> tracks, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_tracks(tracks, out);
}

std::vector<Track> parse_tracks(std::istream& in) {
  std::vector<Track> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (split_fields(line).empty()) continue;
    try {
      out.push_back(track_from_json(json::parse(line)));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    } catch (const json::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

std::vector<Track> load_tracks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open tracks file " + path.string());
  return parse_tracks(in);
}

json report_to_json(const EntropyReport& report) {
  json items = json::array();
  for (const EntropyItem& item : report.items) {
    items.push_back({{"video", item.ref.video},
                     {"frame", item.ref.frame},
                     {"box_index", item.ref.box_index},
                     {"group", item.group},
                     {"entropy", item.entropy}});
  }
  json groups = json::object();
  for (const auto& [key, mean] : report.group_means()) groups[key] = mean;
  return {{"count", report.count},
          {"mean", report.mean},
          {"log_base", report.log_base},
          {"items", std::move(items)},
          {"group_means", std::move(groups)}};
}

EntropyReport report_from_json(const json& j) {
  try {
    EntropyReport r;
    r.count = j.at("count").get<int>();
    r.mean = j.at("mean").get<double>();
    r.log_base = j.at("log_base").get<double>();
    for (const json& ji : j.at("items")) {
      EntropyItem item;
      item.ref = {ji.at("video").get<std::string>(), ji.at("frame").get<int>(),
                  ji.at("box_index").get<int>()};
      item.group = ji.at("group").get<std::string>();
      item.entropy = ji.at("entropy").get<double>();
      r.items.push_back(std::move(item));
    }
    if (r.count != static_cast<int>(r.items.size())) throw ParseError("report count mismatch");
    return r;
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

std::string sha256_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string() + " for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest;
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += kHex[digest[k] >> 4];
    out += kHex[digest[k] & 0xF];
  }
  return out;
}

void RunManifest::add_input(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(path)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) inputs.push_back({f.generic_string(), sha256_hex(f)});
  } else {
    inputs.push_back({path.generic_string(), sha256_hex(path)});
  }
}

json RunManifest::to_json() const {
  json in = json::array();
  for (const auto& d : inputs) in.push_back({{"path", d.path}, {"sha256", d.sha256}});
  return {{"command", command},
          {"tool_version", tool_version},
          {"theta_tau", builder.theta_tau},
          {"gamma", builder.gamma},
          {"top_k", builder.top_k},
          {"min_length", suppression.min_length},
          {"static_thresh", suppression.static_thresh},
          {"nms_viou", suppression.nms_viou},
          {"lambda", rank.lambda},
          {"log_base", log_base},
          {"inputs", std::move(in)},
          {"notes", notes}};
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.builder.theta_tau = j.at("theta_tau").get<double>();
  m.builder.gamma = j.at("gamma").get<int>();
  m.builder.top_k = j.at("top_k").get<int>();
  m.suppression.min_length = j.at("min_length").get<int>();
  m.suppression.static_thresh = j.at("static_thresh").get<double>();
  m.suppression.nms_viou = j.at("nms_viou").get<double>();
  m.rank.lambda = j.at("lambda").get<double>();
  m.log_base = j.at("log_base").get<double>();
  for (const json& d : j.at("inputs")) {
    m.inputs.push_back({d.at("path").get<std::string>(), d.at("sha256").get<std::string>()});
  }
  m.notes = j.at("notes").get<std::map<std::string, std::string>>();
  return m;
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << to_json().dump(2) << '\n';
}

std::filesystem::path manifest_path(const std::filesystem::path& output) {
  auto p = output;
  p += ".manifest.json";
  return p;
}

}  // namespace trackforge
