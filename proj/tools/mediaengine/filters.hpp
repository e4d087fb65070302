#pragma once

#include "av_raii.hpp"
#include "options.hpp"
#include "sources.hpp"

#include <vector>

namespace tfme {

// Applies the supported -vf chain: scale=W:H (H/W may be -1/-2 for
// aspect-preserving, rounded to even), drawbox (color=black:t=fill, optional
// x/y/w/h, enable='between(t,a,b)'), fade=t=in|out:st=S:d=D, fps (handled by
// the transcoder's CFR machinery), format/null (no-ops).
class VideoFilterChain {
public:
    VideoFilterChain(const std::vector<FilterSpec>& specs, int src_w, int src_h);

    int out_width() const { return out_w_; }
    int out_height() const { return out_h_; }
    double fps_override() const { return fps_override_; }  // 0 = none

    void apply(VideoFrameRGB& frame) const;

private:
    struct Drawbox {
        double from = 0, to = 1e18;
        int x = 0, y = 0, w = -1, h = -1;  // -1 = full frame
        uint8_t r = 0, g = 0, b = 0;
    };
    struct Fade {
        bool in = true;
        double st = 0, d = 0;
    };

    int src_w_, src_h_;
    int out_w_, out_h_;
    double fps_override_ = 0;
    std::vector<Drawbox> boxes_;
    std::vector<Fade> fades_;
    mutable SwsPtr sws_;
};

// Supported -af chain: volume=NdB|factor, afade=t=in|out:st=S:d=D.
class AudioFilterChain {
public:
    explicit AudioFilterChain(const std::vector<FilterSpec>& specs);

    // `t` is the time of the first sample in `samples` (mono or interleaved).
    void apply(std::vector<float>& samples, int channels, int sample_rate, double t) const;

private:
    struct Afade {
        bool in = true;
        double st = 0, d = 0;
    };
    double gain_ = 1.0;
    std::vector<Afade> fades_;
};

} // namespace tfme
