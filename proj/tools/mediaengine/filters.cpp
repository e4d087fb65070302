#include "filters.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace tfme {

namespace {

int even(int v) { return v & ~1; }

double arg_num(const FilterSpec& f, const std::string& key, double fallback) {
    std::string v = f.arg(key);
    if (v.empty()) return fallback;
    return strtod(v.c_str(), nullptr);
}

// enable='between(t,a,b)' — quotes were stripped during chain parsing.
bool parse_between(const std::string& expr, double& a, double& b) {
    const char* s = expr.c_str();
    return sscanf(s, "between(t,%lf,%lf)", &a, &b) == 2;
}

} // namespace

VideoFilterChain::VideoFilterChain(const std::vector<FilterSpec>& specs, int src_w, int src_h)
    : src_w_(src_w), src_h_(src_h), out_w_(src_w), out_h_(src_h) {
    for (const auto& f : specs) {
        if (f.name == "scale") {
            int w = static_cast<int>(arg_num(f, "w", arg_num(f, "0", 0)));
            int h = static_cast<int>(arg_num(f, "h", arg_num(f, "1", 0)));
            if (w == 0 || h == 0) throw EngineError("scale: missing dimensions");
            if (w < 0 && h < 0) throw EngineError("scale: both dimensions negative");
            if (w < 0) w = static_cast<int>(std::lround(static_cast<double>(out_w_) * h / out_h_));
            if (h < 0) h = static_cast<int>(std::lround(static_cast<double>(out_h_) * w / out_w_));
            out_w_ = std::max(2, even(w));
            out_h_ = std::max(2, even(h));
        } else if (f.name == "fps") {
            fps_override_ = arg_num(f, "fps", arg_num(f, "0", 0));
            if (fps_override_ <= 0) throw EngineError("fps: bad rate");
        } else if (f.name == "drawbox") {
            Drawbox box;
            std::string color = f.arg("color", f.arg("c", "black"));
            if (color != "black")
                throw EngineError("drawbox: only color=black supported");
            if (f.arg("t", "fill") != "fill")
                throw EngineError("drawbox: only t=fill supported");
            if (f.has("enable")) {
                if (!parse_between(f.arg("enable"), box.from, box.to))
                    throw EngineError("drawbox: enable must be between(t,a,b)");
            }
            box.x = static_cast<int>(arg_num(f, "x", 0));
            box.y = static_cast<int>(arg_num(f, "y", 0));
            box.w = static_cast<int>(arg_num(f, "w", -1));
            box.h = static_cast<int>(arg_num(f, "h", -1));
            boxes_.push_back(box);
        } else if (f.name == "fade") {
            Fade fade;
            std::string type = f.arg("t", f.arg("type", f.arg("0", "in")));
            fade.in = (type == "in");
            fade.st = arg_num(f, "st", arg_num(f, "start_time", 0));
            fade.d = arg_num(f, "d", arg_num(f, "duration", 0));
            if (fade.d <= 0) throw EngineError("fade: d must be > 0");
            fades_.push_back(fade);
        } else if (f.name == "format" || f.name == "null" || f.name == "setsar") {
            // no-op: internal processing is rgb24 throughout
        } else {
            throw EngineError("unsupported video filter: " + f.name);
        }
    }
}

void VideoFilterChain::apply(VideoFrameRGB& frame) const {
    if (frame.width != out_w_ || frame.height != out_h_) {
        VideoFrameRGB scaled;
        scaled.width = out_w_;
        scaled.height = out_h_;
        scaled.t = frame.t;
        scaled.rgb.resize(static_cast<size_t>(out_w_) * out_h_ * 3);
        if (!sws_) {
            sws_.reset(sws_getContext(frame.width, frame.height, AV_PIX_FMT_RGB24, out_w_,
                                      out_h_, AV_PIX_FMT_RGB24, SWS_AREA, nullptr, nullptr,
                                      nullptr));
            if (!sws_) throw EngineError("sws_getContext (scale) failed");
        }
        const uint8_t* src[4] = {frame.rgb.data(), nullptr, nullptr, nullptr};
        int src_stride[4] = {frame.width * 3, 0, 0, 0};
        uint8_t* dst[4] = {scaled.rgb.data(), nullptr, nullptr, nullptr};
        int dst_stride[4] = {out_w_ * 3, 0, 0, 0};
        sws_scale(sws_.get(), src, src_stride, 0, frame.height, dst, dst_stride);
        frame = std::move(scaled);
    }

    for (const auto& box : boxes_) {
        if (frame.t < box.from || frame.t > box.to) continue;
        int w = box.w < 0 ? frame.width : box.w;
        int h = box.h < 0 ? frame.height : box.h;
        int x0 = std::clamp(box.x, 0, frame.width);
        int y0 = std::clamp(box.y, 0, frame.height);
        int x1 = std::clamp(box.x + w, 0, frame.width);
        int y1 = std::clamp(box.y + h, 0, frame.height);
        for (int y = y0; y < y1; ++y) {
            uint8_t* row = frame.rgb.data() + (static_cast<size_t>(y) * frame.width + x0) * 3;
            std::memset(row, 0, static_cast<size_t>(x1 - x0) * 3);
        }
    }

    for (const auto& fade : fades_) {
        double u = (frame.t - fade.st) / fade.d;
        double factor = fade.in ? std::clamp(u, 0.0, 1.0) : 1.0 - std::clamp(u, 0.0, 1.0);
        if (factor >= 1.0) continue;
        for (uint8_t& px : frame.rgb)
            px = static_cast<uint8_t>(std::lround(px * factor));
    }
}

AudioFilterChain::AudioFilterChain(const std::vector<FilterSpec>& specs) {
    for (const auto& f : specs) {
        if (f.name == "volume") {
            std::string v = f.arg("volume", f.arg("0", "1.0"));
            if (v.size() > 2 && v.substr(v.size() - 2) == "dB")
                gain_ *= std::pow(10.0, strtod(v.substr(0, v.size() - 2).c_str(), nullptr) / 20.0);
            else
                gain_ *= strtod(v.c_str(), nullptr);
        } else if (f.name == "afade") {
            Afade fade;
            std::string type = f.arg("t", f.arg("type", f.arg("0", "in")));
            fade.in = (type == "in");
            fade.st = arg_num(f, "st", arg_num(f, "start_time", 0));
            fade.d = arg_num(f, "d", arg_num(f, "duration", 0));
            if (fade.d <= 0) throw EngineError("afade: d must be > 0");
            fades_.push_back(fade);
        } else if (f.name == "anull") {
            // no-op
        } else {
            throw EngineError("unsupported audio filter: " + f.name);
        }
    }
}

void AudioFilterChain::apply(std::vector<float>& samples, int channels, int sample_rate,
                             double t) const {
    if (gain_ != 1.0) {
        float g = static_cast<float>(gain_);
        for (float& v : samples) v *= g;
    }
    if (fades_.empty() || channels <= 0 || sample_rate <= 0) return;
    size_t frames = samples.size() / static_cast<size_t>(channels);
    for (size_t i = 0; i < frames; ++i) {
        double ts = t + static_cast<double>(i) / sample_rate;
        double factor = 1.0;
        for (const auto& fade : fades_) {
            double u = (ts - fade.st) / fade.d;
            double g = fade.in ? std::clamp(u, 0.0, 1.0) : 1.0 - std::clamp(u, 0.0, 1.0);
            factor *= g;
        }
        if (factor >= 1.0) continue;
        for (int c = 0; c < channels; ++c)
            samples[i * channels + c] *= static_cast<float>(factor);
    }
}

} // namespace tfme
