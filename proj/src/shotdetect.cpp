#include "trailforge/shotdetect.hpp"

#include "trailforge/errors.hpp"
#include "trailforge/jsonio.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace trailforge {

namespace fs = std::filesystem;

void DetectorParams::validate() const {
    if (!(threshold > 0) || threshold > 100)
        fail(errc::invalid_argument, "detector threshold must lie in (0, 100]");
    if (!(min_shot_len_s > 0))
        fail(errc::invalid_argument, "min_shot_len_s must be > 0");
    if (downscale_width <= 0)
        fail(errc::invalid_argument, "downscale_width must be > 0");
}

ShotAccumulator::ShotAccumulator(DetectorParams params, double fps)
    : params_(std::move(params)), fps_(fps) {
    params_.validate();
    if (!(fps_ > 0)) fail(errc::invalid_argument, "fps must be > 0");
}

void ShotAccumulator::add_frame_score(double score) {
    if (frame_count_ > 0) {
        const double shot_len = static_cast<double>(frame_count_ - shot_start_frame_) / fps_;
        if (score > params_.effective_threshold() && shot_len >= params_.min_shot_len_s) {
            shots_.push_back(Shot{Interval{static_cast<double>(shot_start_frame_) / fps_,
                                           static_cast<double>(frame_count_) / fps_},
                                  shot_peak_});
            shot_start_frame_ = frame_count_;
            shot_peak_ = score;
        }
    }
    frame_count_++;
}

std::vector<Shot> ShotAccumulator::finish() {
    if (frame_count_ > shot_start_frame_) {
        shots_.push_back(Shot{Interval{static_cast<double>(shot_start_frame_) / fps_,
                                       static_cast<double>(frame_count_) / fps_},
                              shot_peak_});
    }
    return std::move(shots_);
}

double frame_difference_score(const uint8_t* a, const uint8_t* b, size_t bytes) {
    if (bytes == 0) return 0;
    uint64_t acc = 0;
    for (size_t i = 0; i < bytes; ++i)
        acc += static_cast<uint64_t>(std::abs(static_cast<int>(a[i]) - static_cast<int>(b[i])));
    return static_cast<double>(acc) * 100.0 / (255.0 * static_cast<double>(bytes));
}

std::vector<Shot> detect_shots(const MediaEngine& engine, const fs::path& video,
                               const DetectorParams& params, std::optional<Interval> span) {
    params.validate();
    std::vector<uint8_t> prev;
    std::vector<double> scores;
    auto geo = engine.decode_video_rgb(
        video, span, params.downscale_width,
        [&](int, const uint8_t* rgb, const MediaEngine::RgbGeometry& g) {
            const size_t bytes = static_cast<size_t>(g.width) * g.height * 3;
            scores.push_back(prev.empty() ? 0.0
                                          : frame_difference_score(prev.data(), rgb, bytes));
            prev.assign(rgb, rgb + bytes);
        });
    if (scores.empty())
        fail(errc::media_engine, fmt::format("no frames decoded from {}", video.string()));

    ShotAccumulator accumulator(params, geo.fps > 0 ? geo.fps : 25.0);
    for (double s : scores) accumulator.add_frame_score(s);
    auto shots = accumulator.finish();
    if (span) {
        for (Shot& s : shots) {
            s.interval.start_s += span->start_s;
            s.interval.end_s += span->start_s;
        }
        // The decoded frame grid may undershoot the span end by a frame;
        // stretch the last shot so the tiling covers the span exactly.
        if (!shots.empty()) shots.back().interval.end_s = span->end_s;
    }
    return shots;
}

std::vector<Interval> find_orphan_spans(const std::vector<Shot>& shots, double orphan_max_s) {
    std::vector<Interval> orphans;
    for (const Shot& shot : shots)
        if (shot.interval.length() < orphan_max_s) orphans.push_back(shot.interval);
    return orphans;
}

std::optional<RectifiedBounds> rectify_clip_bounds(double anchor_ts,
                                                   const std::vector<Shot>& shots, double min_s,
                                                   double max_s) {
    if (shots.empty()) fail(errc::invalid_argument, "rectify: no shots");
    if (!(min_s < max_s)) fail(errc::invalid_argument, "rectify: min_s must be < max_s");
    const double span_lo = shots.front().interval.start_s;
    const double span_hi = shots.back().interval.end_s;
    if (anchor_ts < span_lo || anchor_ts >= span_hi)
        fail(errc::invalid_argument,
             fmt::format("anchor {:.3f} outside analyzed span [{:.3f}, {:.3f})", anchor_ts,
                         span_lo, span_hi));

    std::vector<double> bounds;
    bounds.push_back(shots.front().interval.start_s);
    for (const Shot& s : shots) bounds.push_back(s.interval.end_s);

    std::optional<Interval> best;
    for (double lo : bounds) {
        if (lo > anchor_ts) continue;
        for (double hi : bounds) {
            if (hi <= anchor_ts) continue;
            const double len = hi - lo;
            if (len < min_s || len > max_s) continue;
            if (!best || len > best->length() + 1e-9 ||
                (std::abs(len - best->length()) <= 1e-9 && lo < best->start_s)) {
                best = Interval{lo, hi};
            }
        }
    }
    if (best) return RectifiedBounds{*best, false};

    // Fallback: a min_s window centered on the anchor, shifted into the span.
    if (span_hi - span_lo < min_s - 1e-9) return std::nullopt;
    double lo = anchor_ts - min_s / 2;
    double hi = anchor_ts + min_s / 2;
    if (lo < span_lo) {
        hi += span_lo - lo;
        lo = span_lo;
    }
    if (hi > span_hi) {
        lo -= hi - span_hi;
        hi = span_hi;
    }
    return RectifiedBounds{Interval{lo, hi}, true};
}

fs::path write_shots_sidecar(const std::vector<Shot>& shots, const fs::path& video,
                             const fs::path& out_dir) {
    fs::path dir = out_dir.empty() ? video.parent_path() : out_dir;
    fs::path out = dir / fmt::format("shots_{}.json", video.stem().string());
    json j;
    j["video"] = video.filename().string();
    json arr = json::array();
    for (const Shot& s : shots) {
        arr.push_back({{"start_s", s.interval.start_s},
                       {"end_s", s.interval.end_s},
                       {"peak_score", s.peak_score}});
    }
    j["shots"] = arr;
    save_json(out, j);
    return out;
}

std::vector<Shot> read_shots_sidecar(const fs::path& path) {
    json j = load_json(path);
    std::vector<Shot> shots;
    for (const auto& item : j.at("shots")) {
        shots.push_back(Shot{Interval{item.at("start_s").get<double>(),
                                      item.at("end_s").get<double>()},
                             item.at("peak_score").get<double>()});
    }
    return shots;
}

} // namespace trailforge
