#pragma once

#include "trailforge/adapters.hpp"

#include <filesystem>

namespace trailforge {

struct MockOptions {
    long long seed = 0;
    std::filesystem::path fixtures_dir;  // cue sheets for asr/vad replay
};

Capabilities mock_capabilities(AdapterKind kind);

// Deterministic response payload for a task; throws Error(errc::adapter)
// for adapter-level failures (e.g. missing cue sheet).
json mock_handle(AdapterKind kind, const std::string& task, const json& payload,
                 const MockOptions& opts);

// Unit vector derived from a seeded hash of `content`.
std::vector<float> mock_embed_vector(uint64_t seed, std::string_view content, int dim);

inline constexpr int kMockEmbeddingDim = 64;
inline constexpr double kMockMaxMusicS = 30.0;
inline constexpr double kMockTtsSecondsPerChar = 0.06;
inline constexpr double kMockTtsFreqHz = 220.0;

} // namespace trailforge
