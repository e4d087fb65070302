#pragma once

#include "av_raii.hpp"

#include "options.hpp"

#include <cstdio>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

namespace tfme {

struct VideoFrameRGB {
    int width = 0;
    int height = 0;
    double t = 0;  // presentation time, seconds
    std::vector<uint8_t> rgb;  // packed RGB24, width*height*3
};

struct AudioChunk {
    std::vector<float> interleaved;
    int channels = 0;
    int sample_rate = 0;
    double t = 0;  // time of first sample
    int frames() const { return channels ? static_cast<int>(interleaved.size()) / channels : 0; }
};

struct SourceInfo {
    bool has_video = false;
    bool has_audio = false;
    int width = 0, height = 0;
    double fps = 0;
    int sample_rate = 0;
    int channels = 0;
    double duration_s = 0;
    std::string container;
    std::string vcodec, acodec;
};

class MediaInput {
public:
    virtual ~MediaInput() = default;
    virtual const SourceInfo& info() const = 0;
    virtual std::optional<VideoFrameRGB> next_video() = 0;
    virtual std::optional<AudioChunk> next_audio() = 0;
    virtual void set_need_video(bool v) = 0;
    virtual void set_need_audio(bool v) = 0;
};

class ContainerInput : public MediaInput {
public:
    explicit ContainerInput(const std::string& url, double seek_s = -1);
    ~ContainerInput() override;

    const SourceInfo& info() const override { return info_; }
    std::optional<VideoFrameRGB> next_video() override;
    std::optional<AudioChunk> next_audio() override;
    void set_need_video(bool v) override { need_video_ = v; }
    void set_need_audio(bool v) override { need_audio_ = v; }

    // Packet passthrough for -c:v copy. Mutually exclusive with decoded video.
    std::optional<PacketPtr> next_video_packet();
    AVStream* video_stream() const;

    AVFormatContext* raw() const { return fmt_; }

private:
    bool pump();  // demux+decode one packet; false at EOF after flush
    void push_video_frame(AVFrame* frame);
    void push_audio_frame(AVFrame* frame);

    AVFormatContext* fmt_ = nullptr;
    CodecCtxPtr vdec_;
    CodecCtxPtr adec_;
    SwsPtr sws_;
    int sws_w_ = 0, sws_h_ = 0;
    int sws_fmt_ = -1;
    int vstream_ = -1;
    int astream_ = -1;
    bool need_video_ = true;
    bool need_audio_ = true;
    bool copy_video_ = false;
    bool eof_ = false;
    bool flushed_ = false;
    double drop_video_before_ = -1;  // input-side seek accuracy
    SourceInfo info_;
    std::deque<VideoFrameRGB> vq_;
    std::deque<AudioChunk> aq_;
    std::deque<PacketPtr> pktq_;
};

class RawVideoInput : public MediaInput {
public:
    RawVideoInput(const std::string& url, int width, int height, double fps,
                  const std::string& pix_fmt);
    ~RawVideoInput() override;
    const SourceInfo& info() const override { return info_; }
    std::optional<VideoFrameRGB> next_video() override;
    std::optional<AudioChunk> next_audio() override { return std::nullopt; }
    void set_need_video(bool) override {}
    void set_need_audio(bool) override {}

private:
    FILE* file_ = nullptr;
    bool own_file_ = false;
    long frame_index_ = 0;
    SourceInfo info_;
};

class RawAudioInput : public MediaInput {
public:
    RawAudioInput(const std::string& url, int sample_rate, int channels);
    ~RawAudioInput() override;
    const SourceInfo& info() const override { return info_; }
    std::optional<VideoFrameRGB> next_video() override { return std::nullopt; }
    std::optional<AudioChunk> next_audio() override;
    void set_need_video(bool) override {}
    void set_need_audio(bool) override {}

private:
    FILE* file_ = nullptr;
    bool own_file_ = false;
    long samples_read_ = 0;
    SourceInfo info_;
};

// ffmpeg concat-demuxer list: lines of `file 'path'`, paths relative to the
// list's directory. Files are decoded back to back; video timestamps are
// rebased by whole frames so the output stays CFR across joints.
class ConcatInput : public MediaInput {
public:
    explicit ConcatInput(const std::string& list_path);
    const SourceInfo& info() const override { return info_; }
    std::optional<VideoFrameRGB> next_video() override;
    std::optional<AudioChunk> next_audio() override;
    void set_need_video(bool v) override;
    void set_need_audio(bool v) override;

private:
    bool advance();  // open next file; false when the list is exhausted
    std::optional<VideoFrameRGB> pull_current_video();

    std::vector<std::string> paths_;
    size_t index_ = 0;
    std::unique_ptr<ContainerInput> current_;
    bool need_video_ = true;
    bool need_audio_ = true;
    double video_base_ = 0;   // accumulated video time across finished files
    long video_frames_in_current_ = 0;
    std::deque<VideoFrameRGB> pending_video_;
    std::deque<AudioChunk> pending_audio_;
    SourceInfo info_;
};

std::unique_ptr<MediaInput> open_input(const InputSpec& spec);

} // namespace tfme
