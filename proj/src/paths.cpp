#include "trailforge/paths.hpp"

#include "trailforge/errors.hpp"

#include <fmt/core.h>

#include <cstdlib>

#include <unistd.h>

#ifndef TRAILFORGE_SOURCE_SHARE_DIR
#define TRAILFORGE_SOURCE_SHARE_DIR ""
#endif

namespace trailforge {

namespace fs = std::filesystem;

fs::path share_dir() {
    if (const char* env = std::getenv("TRAILFORGE_SHARE_DIR"); env && *env) return env;

    char buf[4096];
    ssize_t n = readlink("/proc/self/exe", buf, sizeof buf - 1);
    if (n > 0) {
        buf[n] = '\0';
        fs::path candidate = fs::path(buf).parent_path().parent_path() / "share" / "trailforge";
        if (fs::is_directory(candidate)) return candidate;
    }

    fs::path fallback = TRAILFORGE_SOURCE_SHARE_DIR;
    if (!fallback.empty() && fs::is_directory(fallback)) return fallback;
    fail(errc::config,
         "cannot locate the share/trailforge data directory; set TRAILFORGE_SHARE_DIR");
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec && !fs::is_directory(dir))
        fail(errc::io, fmt::format("cannot create directory {}: {}", dir.string(), ec.message()));
}

} // namespace trailforge
