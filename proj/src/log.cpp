#include "trailforge/log.hpp"

#include <atomic>

namespace trailforge::log {

namespace {

std::atomic<Level> g_level{Level::info};
std::mutex g_mutex;
FILE* g_file = nullptr;

const char* tag(Level lvl) {
    switch (lvl) {
        case Level::debug: return "debug";
        case Level::info: return "info";
        case Level::warn: return "warn";
        case Level::error: return "error";
    }
    return "?";
}

} // namespace

Level level() { return g_level.load(std::memory_order_relaxed); }
void set_level(Level lvl) { g_level.store(lvl, std::memory_order_relaxed); }

void set_file(const std::string& path) {
    std::lock_guard lock(g_mutex);
    if (g_file) fclose(g_file);
    g_file = fopen(path.c_str(), "a");
}

void close_file() {
    std::lock_guard lock(g_mutex);
    if (g_file) fclose(g_file);
    g_file = nullptr;
}

void write(Level lvl, const std::string& line) {
    std::lock_guard lock(g_mutex);
    fprintf(stderr, "[%s] %s\n", tag(lvl), line.c_str());
    if (g_file) {
        fprintf(g_file, "[%s] %s\n", tag(lvl), line.c_str());
        fflush(g_file);
    }
}

} // namespace trailforge::log
