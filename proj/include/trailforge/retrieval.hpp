#pragma once

#include "trailforge/mediaio.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace trailforge {

struct SubplotQuery {
    int subplot_index = 0;
    std::string text;                    // raw subplot, fallback query
    std::vector<std::string> keywords;   // preferred query when non-empty

    // Keywords joined by ", ", falling back to the subplot text.
    std::string query_text() const;
};

struct RejectedFrame {
    int frame_index = 0;
    double similarity = 0;
    std::string reason;  // "min_sep" | "text"
};

struct SubplotAssignment {
    int subplot_index = 0;
    FrameRecord frame;
    double similarity = 0;
    std::vector<RejectedFrame> rejected;  // audit trail, ranked order
};

struct SelectionConstraints {
    double min_sep_s = 0;          // 0.015 x movie duration, set by caller
    double partition_frac = 0.4;
    double ocr_conf_threshold = 0.4;
    double ocr_min_area_frac = 0.002;
};

SelectionConstraints make_constraints(double movie_duration_s);

double cosine_similarity(std::span<const float> a, std::span<const float> b);

std::vector<float> normalize_embedding(std::vector<float> v);

// Frames inside `window` sorted by descending similarity; ties earlier first.
std::vector<const FrameRecord*> rank_frames(std::span<const float> query,
                                            const std::vector<FrameRecord>& frames,
                                            Interval window);

// true = frame carries blocking superimposed text. Implementations cache
// verdicts into FrameRecord::has_text via the mutable pool.
using TextProbe = std::function<bool(const FrameRecord& frame)>;

// Embeds nothing itself: every frame must already carry an embedding and
// each query must be pre-embedded by the caller.
struct EmbeddedQuery {
    SubplotQuery query;
    std::vector<float> embedding;
};

std::vector<SubplotAssignment> select_frames(const std::vector<EmbeddedQuery>& subplots,
                                             std::vector<FrameRecord>& frames,
                                             const SelectionConstraints& constraints,
                                             double movie_duration_s, const TextProbe& has_text,
                                             const std::function<void(const std::string&)>& warn = {});

// OCR gate: any region at or above both the confidence and area thresholds
// blocks the frame.
struct OcrRegion {
    double confidence = 0;
    double area_frac = 0;
};
bool regions_block_frame(const std::vector<OcrRegion>& regions,
                         const SelectionConstraints& constraints);

} // namespace trailforge
