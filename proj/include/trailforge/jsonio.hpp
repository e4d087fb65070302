#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>

namespace trailforge {

// Ordered JSON everywhere: artifact files must serialize with stable key
// order so checkpoint digests and determinism checks hold.
using json = nlohmann::ordered_json;

json load_json(const std::filesystem::path& path);

// Write-to-temp + rename. Output always ends with a newline.
void save_json(const std::filesystem::path& path, const json& j, int indent = 2);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace trailforge
