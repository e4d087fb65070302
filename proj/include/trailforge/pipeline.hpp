#pragma once

#include "trailforge/adapters.hpp"
#include "trailforge/errors.hpp"
#include "trailforge/jsonio.hpp"
#include "trailforge/mediaio.hpp"
#include "trailforge/project.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>

namespace trailforge {

inline constexpr int kFirstPhase = 0;
inline constexpr int kLastPhase = 11;

const char* phase_name(int phase);

struct RunOptions {
    int from_phase = kFirstPhase;
    int to_phase = kLastPhase;
    std::optional<long long> seed;
    bool allow_missing_music = false;
};

struct RunSummary {
    int first_phase = 0;
    int last_phase = 0;
    std::filesystem::path trailer;  // empty unless phase 11 ran
    json artifacts = json::object();
    std::vector<std::string> warnings;
};

// Thrown (wrapped) phase failures carry the phase id for exit-code plumbing.
class PhaseError : public Error {
public:
    PhaseError(int phase, errc code, const std::string& message)
        : Error(errc::phase, message), phase_(phase), cause_(code) {}
    int phase() const { return phase_; }
    errc cause() const { return cause_; }

private:
    int phase_;
    errc cause_;
};

// Per-file SHA-256 checkpoints; a phase is complete only when its recorded
// artifacts still hash-match (media artifacts are covered by their probed
// durations inside the JSON manifests).
struct PipelineState {
    long long seed = 0;
    std::set<int> completed;
    std::map<int, std::map<std::string, std::string>> digests;  // phase -> relpath -> sha

    json to_json() const;
    static PipelineState from_json(const json& j);
};

class Pipeline {
public:
    Pipeline(const std::filesystem::path& config_path,
             const std::filesystem::path& adapters_manifest);

    RunSummary run(const RunOptions& opts = {});

    const ProjectConfig& config() const { return config_; }
    const std::filesystem::path& project_dir() const { return project_dir_; }

private:
    void connect_adapters();
    void validate_upstream(int from_phase) const;
    void mark_complete(int phase, const std::vector<std::filesystem::path>& artifacts);
    void save_state() const;
    std::filesystem::path abs(const std::string& rel) const { return project_dir_ / rel; }

    void phase0_setup();
    void phase1_frames();
    void phase2_subplots();
    void phase3_quote_clips();
    void phase4_retrieval();
    void phase5_standard_clips();
    void phase6_visual_assembly();
    void phase7_voice_text();
    void phase8_voice_speech();
    void phase9_voice_assembly();
    void phase10_music();
    void phase11_final();

    void warn(const std::string& msg);

    std::filesystem::path config_path_;
    std::filesystem::path adapters_manifest_;
    std::filesystem::path project_dir_;
    ProjectConfig config_;
    std::filesystem::path movie_;
    std::optional<MediaEngine> engine_;
    std::optional<AdapterSet> adapters_;
    PipelineState state_;
    long long seed_ = 0;
    bool allow_missing_music_ = false;
    std::vector<std::string> warnings_;
    int parallelism_ = 1;
};

} // namespace trailforge
