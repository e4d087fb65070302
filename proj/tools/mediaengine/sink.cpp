#include "sink.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace tfme {

namespace {

AVRational fps_to_timebase(double fps) {
    AVRational rate = av_d2q(fps, 100000);
    return av_inv_q(rate);
}

void write_all_stdout(const void* data, size_t n) {
    if (fwrite(data, 1, n, stdout) != n) throw EngineError("short write to stdout");
}

} // namespace

OutputSink::OutputSink(const std::string& url, const std::string& format, bool want_video,
                       bool want_audio, const VideoEncSettings& video,
                       const AudioEncSettings& audio, AVStream* copy_video_from)
    : want_video_(want_video), want_audio_(want_audio), vset_(video), aset_(audio) {
    if (url == "-" || url == "pipe:1") {
        raw_stdout_ = true;
        if (format == "rawvideo") raw_video_ = true;
        else if (format == "s16le") raw_video_ = false;
        else throw EngineError("stdout output requires -f rawvideo or -f s16le");
        return;
    }
    open_container(url, format, copy_video_from);
}

OutputSink::~OutputSink() {
    if (oc_) {
        if (!(oc_->oformat->flags & AVFMT_NOFILE) && oc_->pb) avio_closep(&oc_->pb);
        avformat_free_context(oc_);
    }
}

void OutputSink::open_container(const std::string& url, const std::string& format,
                                AVStream* copy_video_from) {
    const char* fmt_name = format.empty() ? nullptr : format.c_str();
    check(avformat_alloc_output_context2(&oc_, nullptr, fmt_name, url.c_str()),
          "open output " + url);

    if (want_video_) {
        vstream_ = avformat_new_stream(oc_, nullptr);
        if (!vstream_) throw EngineError("new video stream failed");
        if (vset_.codec == "copy") {
            if (!copy_video_from) throw EngineError("-c:v copy without a video source");
            check(avcodec_parameters_copy(vstream_->codecpar, copy_video_from->codecpar),
                  "copy video params");
            vstream_->codecpar->codec_tag = 0;
            vstream_->time_base = copy_video_from->time_base;
            vstream_->avg_frame_rate = copy_video_from->avg_frame_rate;
        } else {
            setup_video_encoder();
        }
    }
    if (want_audio_) {
        astream_ = avformat_new_stream(oc_, nullptr);
        if (!astream_) throw EngineError("new audio stream failed");
        setup_audio_encoder();
    }

    if (!(oc_->oformat->flags & AVFMT_NOFILE))
        check(avio_open(&oc_->pb, url.c_str(), AVIO_FLAG_WRITE), "open " + url);
    AVDictionary* opts = nullptr;
    if (oc_->oformat->name && std::strcmp(oc_->oformat->name, "image2") == 0)
        av_dict_set(&opts, "update", "1", 0);  // plain filename, no %d pattern
    int rc = avformat_write_header(oc_, &opts);
    av_dict_free(&opts);
    check(rc, "write header");
    header_written_ = true;
}

void OutputSink::setup_video_encoder() {
    const AVCodec* codec = avcodec_find_encoder_by_name(vset_.codec.c_str());
    if (!codec) throw EngineError("no encoder " + vset_.codec);
    venc_.reset(avcodec_alloc_context3(codec));
    venc_->width = vset_.width;
    venc_->height = vset_.height;
    venc_->time_base = fps_to_timebase(vset_.fps);
    venc_->framerate = av_inv_q(venc_->time_base);
    venc_->pix_fmt = vset_.codec == "mjpeg" ? AV_PIX_FMT_YUVJ420P : AV_PIX_FMT_YUV420P;
    venc_->gop_size = std::max(1, static_cast<int>(std::lround(vset_.fps)));
    venc_->max_b_frames = 0;
    venc_->thread_count = 1;
    venc_->flags |= AV_CODEC_FLAG_QSCALE;
    venc_->global_quality = static_cast<int>(FF_QP2LAMBDA * vset_.qscale);
    if (vset_.codec == "mjpeg") venc_->color_range = AVCOL_RANGE_JPEG;
    if (oc_->oformat->flags & AVFMT_GLOBALHEADER)
        venc_->flags |= AV_CODEC_FLAG_GLOBAL_HEADER;
    check(avcodec_open2(venc_.get(), codec, nullptr), "open video encoder");
    check(avcodec_parameters_from_context(vstream_->codecpar, venc_.get()),
          "video stream params");
    vstream_->time_base = venc_->time_base;
    vstream_->avg_frame_rate = venc_->framerate;

    vframe_ = alloc_frame();
    vframe_->format = venc_->pix_fmt;
    vframe_->width = venc_->width;
    vframe_->height = venc_->height;
    check(av_frame_get_buffer(vframe_.get(), 0), "alloc video frame");

    sws_.reset(sws_getContext(vset_.width, vset_.height, AV_PIX_FMT_RGB24, venc_->width,
                              venc_->height, venc_->pix_fmt, SWS_BILINEAR, nullptr, nullptr,
                              nullptr));
    if (!sws_) throw EngineError("sws for encoder failed");
}

void OutputSink::setup_audio_encoder() {
    const AVCodec* codec = avcodec_find_encoder_by_name(aset_.codec.c_str());
    if (!codec) throw EngineError("no encoder " + aset_.codec);
    aenc_.reset(avcodec_alloc_context3(codec));
    aenc_->sample_rate = aset_.sample_rate;
    aenc_->channels = aset_.channels;
    aenc_->channel_layout = av_get_default_channel_layout(aset_.channels);
    aenc_->time_base = AVRational{1, aset_.sample_rate};
    aenc_->thread_count = 1;
    if (aset_.codec == "aac") {
        aenc_->sample_fmt = AV_SAMPLE_FMT_FLTP;
        aenc_->bit_rate = aset_.bitrate;
    } else if (aset_.codec == "pcm_s16le") {
        aenc_->sample_fmt = AV_SAMPLE_FMT_S16;
    } else {
        throw EngineError("unsupported audio codec " + aset_.codec);
    }
    if (oc_->oformat->flags & AVFMT_GLOBALHEADER)
        aenc_->flags |= AV_CODEC_FLAG_GLOBAL_HEADER;
    check(avcodec_open2(aenc_.get(), codec, nullptr), "open audio encoder");
    check(avcodec_parameters_from_context(astream_->codecpar, aenc_.get()),
          "audio stream params");
    astream_->time_base = aenc_->time_base;
}

void OutputSink::write_packet(AVPacket* pkt, AVCodecContext* enc, AVStream* stream) {
    av_packet_rescale_ts(pkt, enc->time_base, stream->time_base);
    pkt->stream_index = stream->index;
    check(av_interleaved_write_frame(oc_, pkt), "write packet");
}

void OutputSink::drain(AVCodecContext* enc, AVStream* stream) {
    auto pkt = alloc_packet();
    for (;;) {
        int rc = avcodec_receive_packet(enc, pkt.get());
        if (rc == AVERROR(EAGAIN) || rc == AVERROR_EOF) break;
        check(rc, "receive packet");
        write_packet(pkt.get(), enc, stream);
        av_packet_unref(pkt.get());
    }
}

void OutputSink::write_video(const VideoFrameRGB& frame) {
    if (raw_stdout_) {
        if (raw_video_) write_all_stdout(frame.rgb.data(), frame.rgb.size());
        video_pts_++;
        return;
    }
    if (!venc_) throw EngineError("video frame without video encoder");
    if (frame.width != vset_.width || frame.height != vset_.height)
        throw EngineError("video frame size changed mid-stream");

    check(av_frame_make_writable(vframe_.get()), "frame writable");
    const uint8_t* src[4] = {frame.rgb.data(), nullptr, nullptr, nullptr};
    int src_stride[4] = {frame.width * 3, 0, 0, 0};
    sws_scale(sws_.get(), src, src_stride, 0, frame.height, vframe_->data, vframe_->linesize);
    vframe_->pts = video_pts_++;
    vframe_->quality = venc_->global_quality;
    check(avcodec_send_frame(venc_.get(), vframe_.get()), "encode video");
    drain(venc_.get(), vstream_);
}

void OutputSink::write_video_packet(AVPacket* pkt, AVStream* src_stream) {
    if (!vstream_) throw EngineError("video packet without video stream");
    av_packet_rescale_ts(pkt, src_stream->time_base, vstream_->time_base);
    pkt->stream_index = vstream_->index;
    check(av_interleaved_write_frame(oc_, pkt), "write copied packet");
    video_pts_++;
}

void OutputSink::write_audio(const float* samples, size_t count) {
    if (raw_stdout_) {
        if (raw_video_) throw EngineError("audio samples on a rawvideo pipe");
        std::vector<int16_t> raw(count);
        for (size_t i = 0; i < count; ++i) {
            float v = std::clamp(samples[i], -1.0f, 1.0f);
            raw[i] = static_cast<int16_t>(std::lrintf(v * 32767.0f));
        }
        write_all_stdout(raw.data(), raw.size() * 2);
        audio_pts_ += static_cast<int64_t>(count / std::max(1, aset_.channels));
        return;
    }
    if (!aenc_) throw EngineError("audio samples without audio encoder");
    audio_buffer_.insert(audio_buffer_.end(), samples, samples + count);
    flush_audio_buffer(false);
}

void OutputSink::flush_audio_buffer(bool final) {
    const int ch = aset_.channels;
    int frame_size = aenc_->frame_size > 0 ? aenc_->frame_size : 4096;
    const size_t frame_samples = static_cast<size_t>(frame_size) * ch;

    while (audio_buffer_.size() >= frame_samples ||
           (final && !audio_buffer_.empty())) {
        size_t take_frames = std::min<size_t>(frame_size, audio_buffer_.size() / ch);
        if (take_frames == 0) break;

        if (!aframe_ || aframe_->nb_samples != static_cast<int>(take_frames)) {
            aframe_ = alloc_frame();
            aframe_->format = aenc_->sample_fmt;
            aframe_->channel_layout = aenc_->channel_layout;
            aframe_->channels = ch;
            aframe_->sample_rate = aenc_->sample_rate;
            aframe_->nb_samples = static_cast<int>(take_frames);
            check(av_frame_get_buffer(aframe_.get(), 0), "alloc audio frame");
        }
        check(av_frame_make_writable(aframe_.get()), "audio frame writable");

        if (aenc_->sample_fmt == AV_SAMPLE_FMT_FLTP) {
            for (int c = 0; c < ch; ++c) {
                float* dst = reinterpret_cast<float*>(aframe_->extended_data[c]);
                for (size_t i = 0; i < take_frames; ++i) dst[i] = audio_buffer_[i * ch + c];
            }
        } else {  // S16 interleaved
            int16_t* dst = reinterpret_cast<int16_t*>(aframe_->extended_data[0]);
            for (size_t i = 0; i < take_frames * ch; ++i) {
                float v = std::clamp(audio_buffer_[i], -1.0f, 1.0f);
                dst[i] = static_cast<int16_t>(std::lrintf(v * 32767.0f));
            }
        }
        aframe_->pts = audio_pts_;
        audio_pts_ += static_cast<int64_t>(take_frames);
        audio_buffer_.erase(audio_buffer_.begin(),
                            audio_buffer_.begin() + static_cast<long>(take_frames * ch));
        send_audio_frame(aframe_.get());
    }
}

void OutputSink::send_audio_frame(AVFrame* frame) {
    check(avcodec_send_frame(aenc_.get(), frame), "encode audio");
    drain(aenc_.get(), astream_);
}

void OutputSink::finalize() {
    if (finalized_) return;
    finalized_ = true;
    if (raw_stdout_) {
        fflush(stdout);
        return;
    }
    if (aenc_) {
        flush_audio_buffer(true);
        avcodec_send_frame(aenc_.get(), nullptr);
        drain(aenc_.get(), astream_);
    }
    if (venc_) {
        avcodec_send_frame(venc_.get(), nullptr);
        drain(venc_.get(), vstream_);
    }
    if (header_written_) check(av_write_trailer(oc_), "write trailer");
}

} // namespace tfme
