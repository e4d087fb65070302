#pragma once

extern "C" {
#include <libavcodec/avcodec.h>
#include <libavformat/avformat.h>
#include <libavutil/imgutils.h>
#include <libavutil/opt.h>
#include <libswscale/swscale.h>
}

#include <memory>
#include <stdexcept>
#include <string>

namespace tfme {

struct EngineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string av_err(int code) {
    char buf[AV_ERROR_MAX_STRING_SIZE] = {};
    av_strerror(code, buf, sizeof buf);
    return buf;
}

inline void check(int code, const std::string& what) {
    if (code < 0) throw EngineError(what + ": " + av_err(code));
}

struct FrameDeleter {
    void operator()(AVFrame* f) const { av_frame_free(&f); }
};
struct PacketDeleter {
    void operator()(AVPacket* p) const { av_packet_free(&p); }
};
struct CodecCtxDeleter {
    void operator()(AVCodecContext* c) const { avcodec_free_context(&c); }
};
struct SwsDeleter {
    void operator()(SwsContext* s) const { sws_freeContext(s); }
};

using FramePtr = std::unique_ptr<AVFrame, FrameDeleter>;
using PacketPtr = std::unique_ptr<AVPacket, PacketDeleter>;
using CodecCtxPtr = std::unique_ptr<AVCodecContext, CodecCtxDeleter>;
using SwsPtr = std::unique_ptr<SwsContext, SwsDeleter>;

inline FramePtr alloc_frame() {
    AVFrame* f = av_frame_alloc();
    if (!f) throw EngineError("av_frame_alloc failed");
    return FramePtr(f);
}

inline PacketPtr alloc_packet() {
    AVPacket* p = av_packet_alloc();
    if (!p) throw EngineError("av_packet_alloc failed");
    return PacketPtr(p);
}

} // namespace tfme
