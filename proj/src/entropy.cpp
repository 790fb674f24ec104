#include "trackforge/entropy.hpp"

#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "trackforge/error.hpp"
#include "text_util.hpp"

namespace trackforge {

void validate_distribution(std::span<const double> probs) {
  if (probs.size() < 2) throw InvalidDistribution("need at least 2 classes");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw InvalidDistribution("probabilities must be finite and non-negative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbSumTolerance) {
    throw InvalidDistribution("probabilities sum to " + format_double(sum));
  }
}

double shannon_entropy(std::span<const double> probs, double base) {
  validate_distribution(probs);
  if (!(base > 0.0) || base == 1.0) throw InvalidArgument("log base must be positive and != 1");
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return base == std::exp(1.0) ? h : h / std::log(base);
}

const TrackEntry& track_representative(const Track& t) {
  const TrackEntry* best = nullptr;
  for (const TrackEntry& e : t.entries) {
    if (!e.matched()) continue;
    if (!best || e.box.score > best->box.score) best = &e;
  }
  if (!best) throw InvalidArgument("track " + std::to_string(t.id) + " has no matched entry");
  return *best;
}

std::map<std::string, double> EntropyReport::group_means() const {
  std::map<std::string, std::pair<double, int>> acc;
  for (const EntropyItem& item : items) {
    auto& [sum, n] = acc[item.group];
    sum += item.entropy;
    ++n;
  }
  std::map<std::string, double> out;
  for (const auto& [key, v] : acc) out[key] = v.first / v.second;
  return out;
}

EntropyReport evaluate(std::span<const ProbVector> selection, double base, const GroupKey& group) {
  if (selection.empty()) throw EmptySelection();
  EntropyReport report;
  report.log_base = base;
  double sum = 0.0;
  for (const ProbVector& p : selection) {
    EntropyItem item;
    item.ref = p.ref;
    item.group = group ? group(p.ref) : p.ref.video;
    item.entropy = shannon_entropy(p, base);
    sum += item.entropy;
    report.items.push_back(std::move(item));
  }
  report.count = static_cast<int>(report.items.size());
  report.mean = sum / report.count;
  return report;
}

std::vector<ProbVector> parse_probabilities(std::istream& in) {
  std::vector<ProbVector> out;
  std::string line;
  int line_no = 0;
  long long classes = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    if (classes < 0) {
      if (fields.size() != 2 || fields[0] != "NPROB") {
        throw ParseError("expected header 'NPROB <N>'", line_no);
      }
      classes = parse_int(fields[1], line_no);
      if (classes < 2) throw ParseError("NPROB must be >= 2", line_no);
      continue;
    }
    if (fields.size() != static_cast<std::size_t>(classes) + 3) {
      throw ParseError("expected " + std::to_string(classes + 3) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    ProbVector p;
    p.ref.video = std::string(fields[0]);
    p.ref.frame = static_cast<int>(parse_int(fields[1], line_no));
    p.ref.box_index = static_cast<int>(parse_int(fields[2], line_no));
    p.probs.reserve(static_cast<std::size_t>(classes));
    for (std::size_t k = 3; k < fields.size(); ++k) p.probs.push_back(parse_double(fields[k], line_no));
    try {
      validate_distribution(p.probs);
    } catch (const InvalidDistribution& e) {
      throw ParseError(e.what(), line_no);
    }
    out.push_back(std::move(p));
  }
  if (classes < 0) throw ParseError("missing 'NPROB <N>' header");
  return out;
}

std::vector<ProbVector> load_probabilities(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open probability file " + path.string());
  return parse_probabilities(in);
}

void write_probabilities(std::span<const ProbVector> probs, std::ostream& out) {
  const std::size_t n = probs.empty() ? 0 : probs.front().probs.size();
  out << "NPROB " << n << '\n';
  for (const ProbVector& p : probs) {
    if (p.probs.size() != n) throw InvalidArgument("probability vectors differ in length");
    out << p.ref.video << ' ' << p.ref.frame << ' ' << p.ref.box_index;
    for (double v : p.probs) out << ' ' << format_double(v);
    out << '\n';
  }
}

void write_probabilities(std::span<const ProbVector> probs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_probabilities(probs, out);
}

}  // namespace trackforge
