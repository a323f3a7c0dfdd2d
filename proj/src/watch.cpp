#include "pie/watch.hpp"

namespace fs = std::filesystem;

namespace pie {

namespace {

fs::path resolve(const fs::path& working_dir, const std::string& pie_path) {
  if (!pie_path.empty() && pie_path.front() == '/') return fs::path(pie_path);
  return working_dir / pie_path;
}

}  // namespace

bool any_stamp_changed(const Store& store, const fs::path& working_dir) {
  bool changed = false;
  store.for_each_task([&](const TaskKey&, const TaskData& data) {
    if (changed) return;
    for (const Dependency& dep : data.deps) {
      if (auto* q = std::get_if<RequireDep>(&dep)) {
        if (stamp_path(resolve(working_dir, q->path), q->stamper, q->filter) != q->stamp) {
          changed = true;
          return;
        }
      } else if (auto* g = std::get_if<GenerateDep>(&dep)) {
        if (stamp_path(resolve(working_dir, g->path), g->stamper) != g->stamp) {
          changed = true;
          return;
        }
      }
    }
  });
  return changed;
}

}  // namespace pie
