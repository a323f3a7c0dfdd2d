#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pie/bytes.hpp"
#include "pie/value.hpp"

namespace pie {

enum class PathStamperKind : uint8_t { Exists = 0, Modified = 1, Hash = 2 };
enum class OutputStamperKind : uint8_t { Equals = 0, HashOnly = 1 };

const char* stamper_name(PathStamperKind k);

enum class FilterKind : uint8_t { Regex = 0, Pattern = 1, Extension = 2 };

// Restricts which directory entries a path dependency covers. Filters apply
// to files; directories always pass (they must stay visible to walks).
struct Filter {
  FilterKind kind;
  std::vector<std::string> args;

  // Validates the arguments (regex compilation, non-empty extensions);
  // throws InvalidPatternError.
  static Filter make(FilterKind kind, std::vector<std::string> args);

  bool operator==(const Filter&) const = default;
};

// True when the filter accepts the (relative) path. Regex filters match the
// file name, Extension filters the file-name extension (without dot),
// Pattern filters match ANT-style globs against the whole relative path.
bool filter_accepts(const Filter& f, std::string_view rel_path);

// ANT-style glob: `*` and `?` within a segment, `**` across segments.
bool ant_pattern_match(std::string_view pattern, std::string_view path);

// Change-detection fingerprints. Equal stamps mean "unchanged".
struct ExistsStamp {
  bool exists = false;
  bool operator==(const ExistsStamp&) const = default;
};
struct ModTimeStamp {
  bool present = false;  // false: path absent
  int64_t nanos = 0;
  bool operator==(const ModTimeStamp&) const = default;
};
struct DigestStamp {
  bool present = false;
  Sha256 digest{};
  bool operator==(const DigestStamp&) const = default;
};
struct OutputEqualsStamp {
  Bytes bytes;
  bool operator==(const OutputEqualsStamp&) const = default;
};
struct OutputDigestStamp {
  Sha256 digest{};
  bool operator==(const OutputDigestStamp&) const = default;
};
// Constant stamp for transient task outputs; callers revalidate through the
// callee's own dependencies instead of comparing output bytes.
struct TransientStamp {
  bool operator==(const TransientStamp&) const = default;
};

struct Stamp {
  std::variant<ExistsStamp, ModTimeStamp, DigestStamp, OutputEqualsStamp, OutputDigestStamp,
               TransientStamp>
      payload;

  bool operator==(const Stamp&) const = default;

  void encode_to(Bytes& out) const;
  static Stamp decode(ByteReader& r);

  std::string describe() const;
};

// Fingerprints the filesystem state at `fs_path`. `rel_root` is the path
// text dependencies are recorded under; it anchors Pattern filters.
// Nonexistent paths stamp as ExistsStamp{false} / absent payloads.
Stamp stamp_path(const std::filesystem::path& fs_path, PathStamperKind kind,
                 const std::optional<Filter>& filter = std::nullopt);

Stamp stamp_output(const Value& v, OutputStamperKind kind);

}  // namespace pie
