#include "trailforge/shotdetect.hpp"

#include "trailforge/errors.hpp"
#include "trailforge/hashing.hpp"

#include "../support/fixtures.hpp"

#include <doctest.h>

#include <cmath>

using namespace trailforge;

namespace {

// Feed synthetic per-frame scores straight into the accumulator.
std::vector<Shot> shots_from_scores(const std::vector<double>& scores, double fps,
                                    DetectorParams params = {}) {
    ShotAccumulator acc(params, fps);
    for (double s : scores) acc.add_frame_score(s);
    return acc.finish();
}

void check_tiling(const std::vector<Shot>& shots, double duration) {
    REQUIRE(!shots.empty());
    CHECK(shots.front().interval.start_s == doctest::Approx(0.0));
    CHECK(shots.back().interval.end_s == doctest::Approx(duration));
    for (size_t i = 1; i < shots.size(); ++i)
        CHECK(shots[i].interval.start_s == doctest::Approx(shots[i - 1].interval.end_s));
}

} // namespace

TEST_CASE("accumulator opens shots at high-score frames") {
    // 10 fps, cuts at frames 20 and 40 of 60.
    std::vector<double> scores(60, 0.5);
    scores[20] = 80;
    scores[40] = 75;
    auto shots = shots_from_scores(scores, 10);
    REQUIRE(shots.size() == 3);
    CHECK(shots[0].interval.start_s == doctest::Approx(0.0));
    CHECK(shots[0].interval.end_s == doctest::Approx(2.0));
    CHECK(shots[1].interval.end_s == doctest::Approx(4.0));
    CHECK(shots[2].interval.end_s == doctest::Approx(6.0));
    check_tiling(shots, 6.0);
}

TEST_CASE("uniform video yields one shot; threshold 100 is unreachable") {
    auto shots = shots_from_scores(std::vector<double>(100, 0.2), 25);
    CHECK(shots.size() == 1);

    std::vector<double> wild(100);
    SplitMix64 rng(5);
    for (double& s : wild) s = rng.next_unit() * 100.0;
    DetectorParams p;
    p.threshold = 100;
    CHECK(shots_from_scores(wild, 25, p).size() == 1);
}

TEST_CASE("min shot length suppresses rapid-fire cuts") {
    std::vector<double> scores(50, 0.0);
    scores[10] = 90;
    scores[12] = 90;  // 0.08 s after the previous cut at 25 fps
    scores[30] = 90;
    auto shots = shots_from_scores(scores, 25);
    REQUIRE(shots.size() == 3);  // the frame-12 cut is absorbed
    CHECK(shots[1].interval.start_s == doctest::Approx(10.0 / 25));
    CHECK(shots[2].interval.start_s == doctest::Approx(30.0 / 25));
}

TEST_CASE("lowering the threshold never reduces the cut count") {
    SplitMix64 rng(99);
    for (int round = 0; round < 30; ++round) {
        std::vector<double> scores(200);
        for (double& s : scores) s = rng.next_unit() * 60.0;
        DetectorParams hi;
        hi.threshold = 50;
        DetectorParams lo;
        lo.threshold = 25;
        // Separate cuts well beyond min_shot_len to keep interactions out.
        hi.min_shot_len_s = lo.min_shot_len_s = 0.04;
        auto n_hi = shots_from_scores(scores, 25, hi).size();
        auto n_lo = shots_from_scores(scores, 25, lo).size();
        CHECK(n_lo >= n_hi);
    }
}

TEST_CASE("orphan spans are exactly the short shots") {
    std::vector<Shot> shots = {
        {{0.0, 3.0}, 0},
        {{3.0, 3.2}, 50},
        {{3.2, 7.2}, 60},
    };
    auto orphans = find_orphan_spans(shots, 0.5);
    REQUIRE(orphans.size() == 1);
    CHECK(orphans[0].start_s == doctest::Approx(3.0));
    CHECK(orphans[0].end_s == doctest::Approx(3.2));

    CHECK(find_orphan_spans(shots, 0.1).empty());
    std::vector<Shot> tiny = {{{0.0, 0.1}, 0}, {{0.1, 0.2}, 50}};
    CHECK(find_orphan_spans(tiny, 0.5).size() == 2);
}

TEST_CASE("rectify picks the longest boundary pair around the anchor") {
    // Boundaries {95, 99, 106, 115} as shot edges.
    std::vector<Shot> shots = {
        {{95.0, 99.0}, 0},
        {{99.0, 106.0}, 40},
        {{106.0, 115.0}, 45},
    };
    // Enumerated by hand: candidate pairs containing anchor=100 with length
    // in [3, 8]: (95,99) no (anchor outside), (99,106) len 7 ok, (95,106)
    // len 11 too long, (99,115) len 16 too long, (106,...) anchor outside.
    auto bounds = rectify_clip_bounds(100.0, shots, 3, 8);
    REQUIRE(bounds.has_value());
    CHECK(!bounds->fallback);
    CHECK(bounds->interval.start_s == doctest::Approx(99.0));
    CHECK(bounds->interval.end_s == doctest::Approx(106.0));
    CHECK(bounds->interval.contains(100.0));
}

TEST_CASE("rectify falls back to a centered min-length window inside one long shot") {
    std::vector<Shot> shots = {{{0.0, 60.0}, 0}};
    auto bounds = rectify_clip_bounds(30.0, shots, 3, 8);
    REQUIRE(bounds.has_value());
    CHECK(bounds->fallback);
    CHECK(bounds->interval.start_s == doctest::Approx(28.5));
    CHECK(bounds->interval.end_s == doctest::Approx(31.5));

    // Near the edge the window shifts but keeps its length and the anchor.
    auto edge = rectify_clip_bounds(0.5, shots, 3, 8);
    REQUIRE(edge.has_value());
    CHECK(edge->interval.start_s == doctest::Approx(0.0));
    CHECK(edge->interval.length() == doctest::Approx(3.0));
    CHECK(edge->interval.contains(0.5));
}

TEST_CASE("rectify rejects when the span cannot reach the minimum length") {
    std::vector<Shot> shots = {{{0.0, 1.0}, 0}};
    CHECK(!rectify_clip_bounds(0.5, shots, 3, 8).has_value());
    CHECK_THROWS_AS(rectify_clip_bounds(5.0, shots, 3, 8), Error);  // anchor outside
}

TEST_CASE("rectify ties break toward the earlier start") {
    // Two candidate pairs of equal length 6 containing the anchor.
    std::vector<Shot> shots = {
        {{0.0, 2.0}, 0}, {{2.0, 5.0}, 50}, {{5.0, 8.0}, 50}, {{8.0, 11.0}, 50}};
    // Pairs with len 6: (2,8) and (5,11); anchor 6 sits in both.
    auto bounds = rectify_clip_bounds(6.0, shots, 4, 6);
    REQUIRE(bounds.has_value());
    CHECK(bounds->interval.start_s == doctest::Approx(2.0));
    CHECK(bounds->interval.end_s == doctest::Approx(8.0));
}

TEST_CASE("engine-backed detection finds hard cuts in a color fixture") {
    fixtures::TempDir tmp("shots");
    fixtures::MovieSpec spec;
    spec.width = 160;
    spec.height = 120;
    spec.fps = 25;
    spec.segments = {{{200, 30, 30}, 2.0}, {{30, 200, 30}, 2.0}, {{30, 30, 200}, 2.0}};
    fixtures::make_movie(tmp.path() / "cuts.mp4", spec);

    MediaEngine engine(fixtures::engine_binary().string());
    auto shots = detect_shots(engine, tmp.path() / "cuts.mp4");
    REQUIRE(shots.size() == 3);
    const double frame = 1.0 / 25;
    CHECK(std::abs(shots[0].interval.end_s - 2.0) <= frame + 1e-6);
    CHECK(std::abs(shots[1].interval.end_s - 4.0) <= frame + 1e-6);
    check_tiling(shots, shots.back().interval.end_s);

    // Sidecar round trip.
    auto sidecar = write_shots_sidecar(shots, tmp.path() / "cuts.mp4", tmp.path());
    auto back = read_shots_sidecar(sidecar);
    REQUIRE(back.size() == shots.size());
    CHECK(back[1].interval.start_s == doctest::Approx(shots[1].interval.start_s));
}
