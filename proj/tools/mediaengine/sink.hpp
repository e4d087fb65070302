#pragma once

#include "av_raii.hpp"
#include "options.hpp"
#include "sources.hpp"

#include <string>
#include <vector>

namespace tfme {

struct VideoEncSettings {
    std::string codec = "mpeg4";  // or "mjpeg", "copy"
    int width = 0, height = 0;
    double fps = 25;
    double qscale = 3;
};

struct AudioEncSettings {
    std::string codec = "aac";  // or "pcm_s16le"
    int sample_rate = 48000;
    int channels = 1;
    long bitrate = 192000;
};

// Container output (mp4/mov/wav/image2) or raw stdout (rawvideo / s16le).
class OutputSink {
public:
    OutputSink(const std::string& url, const std::string& format, bool want_video,
               bool want_audio, const VideoEncSettings& video, const AudioEncSettings& audio,
               AVStream* copy_video_from);
    ~OutputSink();

    void write_video(const VideoFrameRGB& frame);
    void write_video_packet(AVPacket* pkt, AVStream* src_stream);
    // Interleaved floats at the configured rate/channels.
    void write_audio(const float* samples, size_t count);
    void finalize();

    long video_frames_written() const { return video_pts_; }
    int64_t audio_samples_written() const { return audio_pts_; }

private:
    void open_container(const std::string& url, const std::string& format,
                        AVStream* copy_video_from);
    void setup_video_encoder();
    void setup_audio_encoder();
    void encode_video_frame(AVFrame* frame);
    void flush_audio_buffer(bool final);
    void send_audio_frame(AVFrame* frame);
    void drain(AVCodecContext* enc, AVStream* stream);
    void write_packet(AVPacket* pkt, AVCodecContext* enc, AVStream* stream);

    bool raw_stdout_ = false;
    bool raw_video_ = false;  // rawvideo vs s16le
    bool want_video_ = false;
    bool want_audio_ = false;
    bool finalized_ = false;

    VideoEncSettings vset_;
    AudioEncSettings aset_;

    AVFormatContext* oc_ = nullptr;
    AVStream* vstream_ = nullptr;
    AVStream* astream_ = nullptr;
    CodecCtxPtr venc_;
    CodecCtxPtr aenc_;
    SwsPtr sws_;
    FramePtr vframe_;
    FramePtr aframe_;
    bool header_written_ = false;

    long video_pts_ = 0;
    int64_t audio_pts_ = 0;  // samples fed to the encoder
    std::vector<float> audio_buffer_;
};

} // namespace tfme
