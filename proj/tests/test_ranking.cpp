#include <doctest.h>

#include "oracles.hpp"
#include "trackforge/error.hpp"
#include "trackforge/ranking.hpp"
#include "trackforge/synth.hpp"

using namespace trackforge;
using namespace trackforge::testing;

namespace {

Track with_scores(int id, int length, double e, double i) {
  Track t = constant_track(id, 0, length - 1, {0, 0, 4, 4, 1});
  t.e_score = e;
  t.i_score = i;
  return t;
}

}  // namespace

TEST_CASE("score_track") {
  Track t = with_scores(0, 3, 0.8, 0.6);
  CHECK(score_track(t, 1.0) == 0.8);
  CHECK(score_track(t, 0.0) == 0.6);
  CHECK(score_track(t, 0.5) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(t.rank_score == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("single-entry tracks have no IoU evidence") {
  Track t = make_track(0, 0, {Box{0, 0, 4, 4, 0.9}});
  update_score_components(t);
  CHECK(t.i_score == 0.0);
  CHECK(t.e_score == 0.9);
  CHECK(score_track(t, 0.5) == 0.45);
}

TEST_CASE("rank_tracks ordering") {
  CHECK(rank_tracks({with_scores(0, 3, 0.5, 0.5)}, 0.5).size() == 1);

  const auto ordered = rank_tracks({with_scores(0, 3, 0.9, 0.9), with_scores(1, 3, 0.2, 0.2),
                                    with_scores(2, 3, 0.5, 0.5)},
                                   0.5);
  CHECK(ordered[0].rank_score == 0.9);
  CHECK(ordered[1].rank_score == 0.5);
  CHECK(ordered[2].rank_score == 0.2);

  const auto ties = rank_tracks({with_scores(0, 5, 0.5, 0.5), with_scores(1, 8, 0.5, 0.5)}, 0.5);
  CHECK(ties[0].id == 1);
  const auto id_ties = rank_tracks({with_scores(4, 5, 0.5, 0.5), with_scores(2, 5, 0.5, 0.5)}, 0.5);
  CHECK(id_ties[0].id == 2);

  CHECK_THROWS_AS(rank_tracks({}, 1.5), InvalidArgument);
}

TEST_CASE("rank score is monotone in both components") {
  Rng rng(9);
  for (int n = 0; n < 500; ++n) {
    const double lambda = rng.uniform();
    const double e = rng.uniform(), i = rng.uniform();
    const double de = rng.uniform(0, 1 - e), di = rng.uniform(0, 1 - i);
    Track a = with_scores(0, 2, e, i);
    Track b = with_scores(0, 2, e + de, i);
    Track c = with_scores(0, 2, e, i + di);
    const double s = score_track(a, lambda);
    CHECK(score_track(b, lambda) >= s);
    CHECK(score_track(c, lambda) >= s);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("rank order depends only on score components, length and id") {
  Rng rng(12);
  for (int n = 0; n < 50; ++n) {
    std::vector<Track> tracks;
    for (int id = 0; id < 8; ++id) {
      tracks.push_back(with_scores(id, rng.uniform_int(1, 4), rng.uniform_int(0, 3) / 3.0, rng.uniform_int(0, 3) / 3.0));
    }
    const double lambda = rng.uniform();
    auto shuffled = tracks;
    for (std::size_t k = shuffled.size(); k > 1; --k) std::swap(shuffled[k - 1], shuffled[rng.below(k)]);
    const auto a = rank_tracks(tracks, lambda);
    const auto b = rank_tracks(shuffled, lambda);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k].id == b[k].id);
  }
}
