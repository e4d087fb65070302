#pragma once

#include "trailforge/audio.hpp"
#include "trailforge/mediaio.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace fixtures {

std::filesystem::path engine_binary();       // $TRAILFORGE_MEDIA_ENGINE
std::filesystem::path mockadapter_binary();  // $TRAILFORGE_MOCKADAPTER

// Unique scratch directory under the build tree; removed on destruction
// unless KEEP_TEST_OUTPUT is set.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    bool keep_ = false;
};

struct ColorSegment {
    std::array<uint8_t, 3> rgb;
    double duration_s;
};

struct MovieSpec {
    int width = 320;
    int height = 180;
    double fps = 24;
    std::vector<ColorSegment> segments;
    trailforge::PcmBuffer audio;  // empty samples = no audio track
};

// Encode a synthetic movie through the engine (raw RGB streamed on stdin).
void make_movie(const std::filesystem::path& out, const MovieSpec& spec);

// Convenience: evenly hued scene colors.
std::array<uint8_t, 3> scene_color(int index);

struct DialogueSpot {
    double start_s;
    double end_s;
    std::string text;    // what the asr cue reports
    std::string speaker;
};

// A complete runnable project: movie.mp4, metadata.json, config.json,
// cues/ (asr+vad sheets), adapters.json (subprocess mocks unless
// inproc=true).
struct ProjectFixture {
    std::filesystem::path dir;
    std::filesystem::path config;
    std::filesystem::path adapters;
    std::filesystem::path movie;
    std::vector<DialogueSpot> dialogues;
};

struct ProjectFixtureSpec {
    double duration_s = 60;
    int width = 160;
    int height = 90;
    double fps = 12;
    int n_sc_target = 3;
    int n_qc_target = 1;
    long long seed = 7;
    bool inproc_adapters = false;  // "mock" transport instead of subprocess
    bool orphan_flashes = true;    // 0.3 s flash inside each dialogue window
};

ProjectFixture make_project_fixture(const std::filesystem::path& dir,
                                    const ProjectFixtureSpec& spec);

} // namespace fixtures
