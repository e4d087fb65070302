#include "trailforge/jsonio.hpp"

#include "trailforge/errors.hpp"

#include <fmt/core.h>

#include <fstream>
#include <sstream>

namespace trailforge {

namespace fs = std::filesystem;

json load_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(errc::io, fmt::format("cannot open {}", path.string()));
    try {
        return json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail(errc::parse, fmt::format("{}: {}", path.string(), e.what()));
    }
}

void save_json(const fs::path& path, const json& j, int indent) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) fail(errc::io, fmt::format("cannot write {}", tmp.string()));
        out << j.dump(indent) << "\n";
        if (!out) fail(errc::io, fmt::format("write failed: {}", tmp.string()));
    }
    fs::rename(tmp, path);
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io, fmt::format("cannot open {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(errc::io, fmt::format("cannot write {}", path.string()));
    out << text;
    if (!out) fail(errc::io, fmt::format("write failed: {}", path.string()));
}

} // namespace trailforge
