#pragma once

#include <filesystem>

#include "pie/store.hpp"

namespace pie {

// Re-stamps every recorded require/generate dependency in the store against
// the current filesystem; true when any stamp differs. Drives poll-based
// watching.
bool any_stamp_changed(const Store& store, const std::filesystem::path& working_dir);

}  // namespace pie
