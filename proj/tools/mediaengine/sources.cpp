#include "sources.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace tfme {

namespace {

CodecCtxPtr open_decoder(AVStream* stream) {
    const AVCodec* codec = avcodec_find_decoder(stream->codecpar->codec_id);
    if (!codec)
        throw EngineError(std::string("no decoder for ") +
                          avcodec_get_name(stream->codecpar->codec_id));
    CodecCtxPtr ctx(avcodec_alloc_context3(codec));
    check(avcodec_parameters_to_context(ctx.get(), stream->codecpar), "decoder params");
    ctx->thread_count = 1;  // determinism
    ctx->pkt_timebase = stream->time_base;
    check(avcodec_open2(ctx.get(), codec, nullptr), "open decoder");
    return ctx;
}

double stream_time(AVStream* stream, int64_t ts) {
    if (ts == AV_NOPTS_VALUE) return NAN;
    return static_cast<double>(ts) * av_q2d(stream->time_base);
}

} // namespace

ContainerInput::ContainerInput(const std::string& url, double seek_s) {
    check(avformat_open_input(&fmt_, url.c_str(), nullptr, nullptr), url);
    check(avformat_find_stream_info(fmt_, nullptr), "stream info for " + url);

    for (unsigned i = 0; i < fmt_->nb_streams; ++i) {
        auto type = fmt_->streams[i]->codecpar->codec_type;
        if (type == AVMEDIA_TYPE_VIDEO && vstream_ < 0) vstream_ = static_cast<int>(i);
        if (type == AVMEDIA_TYPE_AUDIO && astream_ < 0) astream_ = static_cast<int>(i);
    }
    info_.container = fmt_->iformat ? fmt_->iformat->name : "";
    if (fmt_->duration != AV_NOPTS_VALUE)
        info_.duration_s = static_cast<double>(fmt_->duration) / AV_TIME_BASE;
    if (vstream_ >= 0) {
        AVStream* vs = fmt_->streams[vstream_];
        info_.has_video = true;
        info_.width = vs->codecpar->width;
        info_.height = vs->codecpar->height;
        AVRational fr = av_guess_frame_rate(fmt_, vs, nullptr);
        info_.fps = fr.num > 0 && fr.den > 0 ? av_q2d(fr) : 0;
        info_.vcodec = avcodec_get_name(vs->codecpar->codec_id);
        vdec_ = open_decoder(vs);
    }
    if (astream_ >= 0) {
        AVStream* as = fmt_->streams[astream_];
        info_.has_audio = true;
        info_.sample_rate = as->codecpar->sample_rate;
        info_.channels = as->codecpar->channels;
        info_.acodec = avcodec_get_name(as->codecpar->codec_id);
        adec_ = open_decoder(as);
    }
    if (vstream_ < 0 && astream_ < 0) throw EngineError(url + ": no decodable streams");

    if (seek_s >= 0) {
        int64_t ts = static_cast<int64_t>(seek_s * AV_TIME_BASE);
        if (av_seek_frame(fmt_, -1, ts, AVSEEK_FLAG_BACKWARD) >= 0) {
            if (vdec_) avcodec_flush_buffers(vdec_.get());
            if (adec_) avcodec_flush_buffers(adec_.get());
            drop_video_before_ = seek_s;
        }
    }
}

ContainerInput::~ContainerInput() {
    if (fmt_) avformat_close_input(&fmt_);
}

AVStream* ContainerInput::video_stream() const {
    return vstream_ >= 0 ? fmt_->streams[vstream_] : nullptr;
}

void ContainerInput::push_video_frame(AVFrame* frame) {
    double t = stream_time(fmt_->streams[vstream_],
                           frame->best_effort_timestamp != AV_NOPTS_VALUE
                               ? frame->best_effort_timestamp
                               : frame->pts);
    if (std::isnan(t)) t = vq_.empty() ? 0.0 : vq_.back().t + 1.0 / std::max(info_.fps, 1.0);
    if (drop_video_before_ >= 0 && t < drop_video_before_ - 1e-4) return;

    VideoFrameRGB out;
    out.width = frame->width;
    out.height = frame->height;
    out.t = t;
    out.rgb.resize(static_cast<size_t>(frame->width) * frame->height * 3);

    if (!sws_ || sws_w_ != frame->width || sws_h_ != frame->height || sws_fmt_ != frame->format) {
        sws_.reset(sws_getContext(frame->width, frame->height,
                                  static_cast<AVPixelFormat>(frame->format), frame->width,
                                  frame->height, AV_PIX_FMT_RGB24, SWS_BILINEAR, nullptr,
                                  nullptr, nullptr));
        if (!sws_) throw EngineError("sws_getContext failed");
        sws_w_ = frame->width;
        sws_h_ = frame->height;
        sws_fmt_ = frame->format;
    }
    uint8_t* dst[4] = {out.rgb.data(), nullptr, nullptr, nullptr};
    int dst_stride[4] = {frame->width * 3, 0, 0, 0};
    sws_scale(sws_.get(), frame->data, frame->linesize, 0, frame->height, dst, dst_stride);
    vq_.push_back(std::move(out));
}

void ContainerInput::push_audio_frame(AVFrame* frame) {
    AudioChunk chunk;
    chunk.channels = frame->channels;
    chunk.sample_rate = frame->sample_rate;
    chunk.t = stream_time(fmt_->streams[astream_],
                          frame->best_effort_timestamp != AV_NOPTS_VALUE
                              ? frame->best_effort_timestamp
                              : frame->pts);
    if (std::isnan(chunk.t)) {
        chunk.t = aq_.empty() ? 0.0
                              : aq_.back().t + static_cast<double>(aq_.back().frames()) /
                                                   std::max(aq_.back().sample_rate, 1);
    }
    const int n = frame->nb_samples;
    const int ch = frame->channels;
    chunk.interleaved.resize(static_cast<size_t>(n) * ch);
    auto fmt = static_cast<AVSampleFormat>(frame->format);
    switch (fmt) {
        case AV_SAMPLE_FMT_FLTP:
            for (int c = 0; c < ch; ++c) {
                const float* src = reinterpret_cast<const float*>(frame->extended_data[c]);
                for (int i = 0; i < n; ++i) chunk.interleaved[static_cast<size_t>(i) * ch + c] = src[i];
            }
            break;
        case AV_SAMPLE_FMT_FLT: {
            const float* src = reinterpret_cast<const float*>(frame->extended_data[0]);
            std::copy(src, src + static_cast<size_t>(n) * ch, chunk.interleaved.begin());
            break;
        }
        case AV_SAMPLE_FMT_S16: {
            const int16_t* src = reinterpret_cast<const int16_t*>(frame->extended_data[0]);
            for (size_t i = 0; i < chunk.interleaved.size(); ++i)
                chunk.interleaved[i] = static_cast<float>(src[i] / 32768.0);
            break;
        }
        case AV_SAMPLE_FMT_S16P:
            for (int c = 0; c < ch; ++c) {
                const int16_t* src = reinterpret_cast<const int16_t*>(frame->extended_data[c]);
                for (int i = 0; i < n; ++i)
                    chunk.interleaved[static_cast<size_t>(i) * ch + c] =
                        static_cast<float>(src[i] / 32768.0);
            }
            break;
        case AV_SAMPLE_FMT_S32: {
            const int32_t* src = reinterpret_cast<const int32_t*>(frame->extended_data[0]);
            for (size_t i = 0; i < chunk.interleaved.size(); ++i)
                chunk.interleaved[i] = static_cast<float>(src[i] / 2147483648.0);
            break;
        }
        default:
            throw EngineError(std::string("unsupported sample format ") +
                              av_get_sample_fmt_name(fmt));
    }
    aq_.push_back(std::move(chunk));
}

bool ContainerInput::pump() {
    if (flushed_) return false;
    auto pkt = alloc_packet();
    auto frame = alloc_frame();

    auto drain = [&](AVCodecContext* dec, bool video) {
        while (avcodec_receive_frame(dec, frame.get()) == 0) {
            if (video) push_video_frame(frame.get());
            else push_audio_frame(frame.get());
            av_frame_unref(frame.get());
        }
    };

    if (!eof_) {
        int rc = av_read_frame(fmt_, pkt.get());
        if (rc == AVERROR_EOF) {
            eof_ = true;
        } else {
            check(rc, "read packet");
            if (pkt->stream_index == vstream_ && need_video_) {
                if (copy_video_) {
                    auto copy = alloc_packet();
                    av_packet_ref(copy.get(), pkt.get());
                    pktq_.push_back(std::move(copy));
                } else if (vdec_) {
                    check(avcodec_send_packet(vdec_.get(), pkt.get()), "decode video");
                    drain(vdec_.get(), true);
                }
            } else if (pkt->stream_index == astream_ && need_audio_ && adec_) {
                check(avcodec_send_packet(adec_.get(), pkt.get()), "decode audio");
                drain(adec_.get(), false);
            }
            return true;
        }
    }
    // EOF: flush both decoders once.
    if (vdec_ && need_video_ && !copy_video_) {
        avcodec_send_packet(vdec_.get(), nullptr);
        drain(vdec_.get(), true);
    }
    if (adec_ && need_audio_) {
        avcodec_send_packet(adec_.get(), nullptr);
        drain(adec_.get(), false);
    }
    flushed_ = true;
    return false;
}

std::optional<VideoFrameRGB> ContainerInput::next_video() {
    while (vq_.empty() && pump()) {}
    if (vq_.empty()) return std::nullopt;
    VideoFrameRGB out = std::move(vq_.front());
    vq_.pop_front();
    return out;
}

std::optional<AudioChunk> ContainerInput::next_audio() {
    while (aq_.empty() && pump()) {}
    if (aq_.empty()) return std::nullopt;
    AudioChunk out = std::move(aq_.front());
    aq_.pop_front();
    return out;
}

std::optional<PacketPtr> ContainerInput::next_video_packet() {
    copy_video_ = true;
    while (pktq_.empty() && pump()) {}
    if (pktq_.empty()) return std::nullopt;
    PacketPtr out = std::move(pktq_.front());
    pktq_.pop_front();
    return out;
}

RawVideoInput::RawVideoInput(const std::string& url, int width, int height, double fps,
                             const std::string& pix_fmt) {
    if (width <= 0 || height <= 0 || fps <= 0)
        throw EngineError("rawvideo input requires -s WxH and -r FPS");
    if (!pix_fmt.empty() && pix_fmt != "rgb24")
        throw EngineError("rawvideo input supports pix_fmt rgb24 only");
    if (url == "-" || url == "pipe:0") {
        file_ = stdin;
    } else {
        file_ = fopen(url.c_str(), "rb");
        own_file_ = true;
    }
    if (!file_) throw EngineError("cannot open " + url);
    info_.has_video = true;
    info_.width = width;
    info_.height = height;
    info_.fps = fps;
    info_.container = "rawvideo";
    info_.vcodec = "rawvideo";
}

RawVideoInput::~RawVideoInput() {
    if (own_file_ && file_) fclose(file_);
}

std::optional<VideoFrameRGB> RawVideoInput::next_video() {
    VideoFrameRGB out;
    out.width = info_.width;
    out.height = info_.height;
    out.rgb.resize(static_cast<size_t>(info_.width) * info_.height * 3);
    size_t got = fread(out.rgb.data(), 1, out.rgb.size(), file_);
    if (got < out.rgb.size()) return std::nullopt;  // truncated trailing frame: stop
    out.t = static_cast<double>(frame_index_++) / info_.fps;
    return out;
}

RawAudioInput::RawAudioInput(const std::string& url, int sample_rate, int channels) {
    if (sample_rate <= 0) throw EngineError("s16le input requires -ar");
    if (channels <= 0) channels = 1;
    if (url == "-" || url == "pipe:0") {
        file_ = stdin;
    } else {
        file_ = fopen(url.c_str(), "rb");
        own_file_ = true;
    }
    if (!file_) throw EngineError("cannot open " + url);
    info_.has_audio = true;
    info_.sample_rate = sample_rate;
    info_.channels = channels;
    info_.container = "s16le";
    info_.acodec = "pcm_s16le";
}

RawAudioInput::~RawAudioInput() {
    if (own_file_ && file_) fclose(file_);
}

std::optional<AudioChunk> RawAudioInput::next_audio() {
    constexpr size_t kFrames = 4096;
    std::vector<int16_t> raw(kFrames * static_cast<size_t>(info_.channels));
    size_t got = fread(raw.data(), 2, raw.size(), file_);
    if (got == 0) return std::nullopt;
    AudioChunk out;
    out.channels = info_.channels;
    out.sample_rate = info_.sample_rate;
    out.t = static_cast<double>(samples_read_) / info_.sample_rate;
    out.interleaved.resize(got);
    for (size_t i = 0; i < got; ++i) out.interleaved[i] = static_cast<float>(raw[i] / 32768.0);
    samples_read_ += static_cast<long>(got / info_.channels);
    return out;
}

ConcatInput::ConcatInput(const std::string& list_path) {
    std::ifstream in(list_path);
    if (!in) throw EngineError("cannot open concat list " + list_path);
    auto base = std::filesystem::path(list_path).parent_path();
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("file ", 0) != 0)
            throw EngineError("unsupported concat directive: " + line);
        std::string path = line.substr(5);
        if (path.size() >= 2 && path.front() == '\'' && path.back() == '\'')
            path = path.substr(1, path.size() - 2);
        std::filesystem::path p(path);
        if (p.is_relative()) p = base / p;
        paths_.push_back(p.string());
    }
    if (paths_.empty()) throw EngineError("empty concat list " + list_path);
    if (!advance()) throw EngineError("concat: no inputs");
    info_ = current_->info();
    // Aggregate duration across all entries for probing purposes.
    info_.duration_s = 0;
    for (const auto& p : paths_) {
        ContainerInput probe(p);
        info_.duration_s += probe.info().duration_s;
    }
}

bool ConcatInput::advance() {
    if (current_) {
        // Rebase by whole frames so the joint stays frame-aligned.
        double fps = current_->info().fps > 0 ? current_->info().fps : 25.0;
        video_base_ += static_cast<double>(video_frames_in_current_) / fps;
        video_frames_in_current_ = 0;
    }
    if (index_ >= paths_.size()) {
        current_.reset();
        return false;
    }
    current_ = std::make_unique<ContainerInput>(paths_[index_++]);
    current_->set_need_video(need_video_);
    current_->set_need_audio(need_audio_);
    return true;
}

std::optional<VideoFrameRGB> ConcatInput::pull_current_video() {
    auto f = current_->next_video();
    if (!f) return std::nullopt;
    f->t = video_base_ + static_cast<double>(video_frames_in_current_) /
                             (current_->info().fps > 0 ? current_->info().fps : 25.0);
    video_frames_in_current_++;
    return f;
}

std::optional<VideoFrameRGB> ConcatInput::next_video() {
    for (;;) {
        if (!pending_video_.empty()) {
            VideoFrameRGB f = std::move(pending_video_.front());
            pending_video_.pop_front();
            return f;
        }
        if (!current_) return std::nullopt;
        if (auto f = pull_current_video()) return f;
        if (need_audio_) {
            // Stash the file's tail audio before moving to the next entry.
            while (auto c = current_->next_audio()) pending_audio_.push_back(std::move(*c));
        }
        if (!advance()) return std::nullopt;
    }
}

std::optional<AudioChunk> ConcatInput::next_audio() {
    for (;;) {
        if (!pending_audio_.empty()) {
            AudioChunk c = std::move(pending_audio_.front());
            pending_audio_.pop_front();
            return c;
        }
        if (!current_) return std::nullopt;
        if (auto c = current_->next_audio()) return c;
        if (need_video_) {
            while (auto f = pull_current_video()) pending_video_.push_back(std::move(*f));
        }
        if (!advance()) return std::nullopt;
    }
}

void ConcatInput::set_need_video(bool v) {
    need_video_ = v;
    if (current_) current_->set_need_video(v);
}

void ConcatInput::set_need_audio(bool v) {
    need_audio_ = v;
    if (current_) current_->set_need_audio(v);
}

std::unique_ptr<MediaInput> open_input(const InputSpec& spec) {
    if (spec.format == "rawvideo")
        return std::make_unique<RawVideoInput>(spec.url, spec.width, spec.height, spec.fps,
                                               spec.pix_fmt);
    if (spec.format == "s16le")
        return std::make_unique<RawAudioInput>(spec.url, spec.sample_rate, spec.channels);
    if (spec.format == "concat") return std::make_unique<ConcatInput>(spec.url);
    if (!spec.format.empty() && spec.format != "mp4" && spec.format != "wav" &&
        spec.format != "mov")
        throw EngineError("unsupported input format: " + spec.format);
    return std::make_unique<ContainerInput>(spec.url, spec.seek_s);
}

} // namespace tfme
