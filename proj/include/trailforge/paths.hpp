#pragma once

#include <filesystem>
#include <string>

namespace trailforge {

// Resolution order: $TRAILFORGE_SHARE_DIR, <exe>/../share/trailforge,
// compile-time source fallback. Holds the bundled lexicons and tables.
std::filesystem::path share_dir();

void ensure_dir(const std::filesystem::path& dir);

} // namespace trailforge
