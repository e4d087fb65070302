#pragma once

#include "trailforge/mediaio.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace trailforge {

struct Shot {
    Interval interval;
    double peak_score = 0;  // score of the cut that opened this shot (0-100)
};

struct DetectorParams {
    double threshold = 30.0;       // 0-100
    double min_shot_len_s = 0.3;
    int downscale_width = 160;
    bool aggressive = false;       // drops the threshold to 22

    double effective_threshold() const { return aggressive ? 22.0 : threshold; }
    void validate() const;
};

// Streaming core: feed per-frame difference scores in order. Scores are the
// mean |delta| of downscaled RGB planes vs the previous frame, scaled to
// 0-100. A cut opens where score > threshold and the running shot has
// reached min_shot_len_s. Shots tile [0, n_frames/fps].
class ShotAccumulator {
public:
    ShotAccumulator(DetectorParams params, double fps);

    void add_frame_score(double score);  // score vs previous frame; first frame passes 0
    std::vector<Shot> finish();

private:
    DetectorParams params_;
    double fps_;
    long frame_count_ = 0;
    long shot_start_frame_ = 0;
    double shot_peak_ = 0;
    std::vector<Shot> shots_;
};

// Mean absolute difference between two RGB24 frames, scaled to 0-100.
double frame_difference_score(const uint8_t* a, const uint8_t* b, size_t bytes);

// Decodes through the engine at params.downscale_width and runs the
// accumulator. Shots tile the analyzed span ([0, duration], or `span` in
// absolute time when given) with no gaps or overlaps.
std::vector<Shot> detect_shots(const MediaEngine& engine, const std::filesystem::path& video,
                               const DetectorParams& params = {},
                               std::optional<Interval> span = std::nullopt);

std::vector<Interval> find_orphan_spans(const std::vector<Shot>& shots, double orphan_max_s);

struct RectifiedBounds {
    Interval interval;
    bool fallback = false;  // true when no boundary pair fit and the
                            // anchor-centered window was used
};

// Boundary-pair selection inside the buffered zone: the longest (b_i, b_j)
// with b_i <= anchor < b_j and min_s <= b_j - b_i <= max_s (ties: earlier
// start); otherwise a min_s window centered on the anchor, shifted to fit
// the span; nullopt when even that cannot reach min_s.
std::optional<RectifiedBounds> rectify_clip_bounds(double anchor_ts,
                                                   const std::vector<Shot>& shots, double min_s,
                                                   double max_s);

// Checkpoint sidecar: shots_{clipname}.json next to `video` (or in out_dir).
std::filesystem::path write_shots_sidecar(const std::vector<Shot>& shots,
                                          const std::filesystem::path& video,
                                          const std::filesystem::path& out_dir = {});
std::vector<Shot> read_shots_sidecar(const std::filesystem::path& path);

} // namespace trailforge
