#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "trackforge/track.hpp"

namespace trackforge {

struct BoxRef {
  std::string video;
  int frame = 0;
  int box_index = 0;

  friend auto operator<=>(const BoxRef&, const BoxRef&) = default;
};

struct ProbVector {
  BoxRef ref;
  std::vector<double> probs;

  friend bool operator==(const ProbVector&, const ProbVector&) = default;
};

inline constexpr double kProbSumTolerance = 1e-6;

// Throws InvalidDistribution unless N >= 2, every entry >= 0 and the sum is
// within kProbSumTolerance of 1.
void validate_distribution(std::span<const double> probs);

// -sum p log p with 0 log 0 = 0. `base` defaults to e (nats).
double shannon_entropy(std::span<const double> probs, double base = std::exp(1.0));
inline double shannon_entropy(const ProbVector& p, double base = std::exp(1.0)) {
  return shannon_entropy(p.probs, base);
}

// Matched entry with the highest box score, earliest frame on ties.
const TrackEntry& track_representative(const Track& t);

struct EntropyItem {
  BoxRef ref;
  std::string group;
  double entropy = 0.0;

  friend bool operator==(const EntropyItem&, const EntropyItem&) = default;
};

struct EntropyReport {
  std::vector<EntropyItem> items;
  double mean = 0.0;
  int count = 0;
  double log_base = std::exp(1.0);

  // Mean entropy per group key, in key order.
  std::map<std::string, double> group_means() const;

  friend bool operator==(const EntropyReport&, const EntropyReport&) = default;
};

using GroupKey = std::function<std::string(const BoxRef&)>;

// Entropy of every vector plus their mean. `group` labels items for
// per-class aggregation; by default every item is keyed by its video.
// Throws EmptySelection.
EntropyReport evaluate(std::span<const ProbVector> selection, double base = std::exp(1.0),
                       const GroupKey& group = {});

// "NPROB <N>" header, then one record per line:
// video frame box_index p_1 ... p_N
std::vector<ProbVector> load_probabilities(const std::filesystem::path& path);
std::vector<ProbVector> parse_probabilities(std::istream& in);
void write_probabilities(std::span<const ProbVector> probs, std::ostream& out);
void write_probabilities(std::span<const ProbVector> probs, const std::filesystem::path& path);

}  // namespace trackforge
