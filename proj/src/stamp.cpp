#include "pie/stamp.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <regex>

#include "pie/errors.hpp"

namespace fs = std::filesystem;

namespace pie {

const char* stamper_name(PathStamperKind k) {
  switch (k) {
    case PathStamperKind::Exists:
      return "exists";
    case PathStamperKind::Modified:
      return "modified";
    case PathStamperKind::Hash:
      return "hash";
  }
  return "?";
}

Filter Filter::make(FilterKind kind, std::vector<std::string> args) {
  if (args.empty()) throw InvalidPatternError("filter needs at least one argument");
  for (const std::string& a : args) {
    switch (kind) {
      case FilterKind::Regex:
        try {
          std::regex re(a);
        } catch (const std::regex_error& e) {
          throw InvalidPatternError("invalid regex '" + a + "': " + e.what());
        }
        break;
      case FilterKind::Extension:
        if (a.empty() || a.front() == '.')
          throw InvalidPatternError("extension filter argument must be non-empty, without dot: '" +
                                    a + "'");
        break;
      case FilterKind::Pattern:
        if (a.empty()) throw InvalidPatternError("empty pattern");
        break;
    }
  }
  return Filter{kind, std::move(args)};
}

namespace {

std::string_view file_name_of(std::string_view rel) {
  size_t pos = rel.find_last_of('/');
  return pos == std::string_view::npos ? rel : rel.substr(pos + 1);
}

std::string_view extension_of(std::string_view name) {
  size_t pos = name.find_last_of('.');
  if (pos == std::string_view::npos || pos == 0) return {};
  return name.substr(pos + 1);
}

bool segment_glob_match(std::string_view pat, std::string_view seg) {
  // Classic backtracking * / ? matcher over one path segment.
  size_t p = 0, s = 0, star = std::string_view::npos, mark = 0;
  while (s < seg.size()) {
    if (p < pat.size() && (pat[p] == '?' || pat[p] == seg[s])) {
      p++;
      s++;
    } else if (p < pat.size() && pat[p] == '*') {
      star = p++;
      mark = s;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      s = ++mark;
    } else {
      return false;
    }
  }
  while (p < pat.size() && pat[p] == '*') p++;
  return p == pat.size();
}

std::vector<std::string_view> split_segments(std::string_view s) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i <= s.size()) {
    size_t j = s.find('/', i);
    if (j == std::string_view::npos) j = s.size();
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j + 1;
  }
  return out;
}

bool segments_match(std::span<const std::string_view> pat, std::span<const std::string_view> segs) {
  if (pat.empty()) return segs.empty();
  if (pat[0] == "**") {
    // `**` matches zero or more whole segments.
    for (size_t skip = 0; skip <= segs.size(); skip++) {
      if (segments_match(pat.subspan(1), segs.subspan(skip))) return true;
    }
    return false;
  }
  if (segs.empty()) return false;
  if (!segment_glob_match(pat[0], segs[0])) return false;
  return segments_match(pat.subspan(1), segs.subspan(1));
}

}  // namespace

bool ant_pattern_match(std::string_view pattern, std::string_view path) {
  auto pat = split_segments(pattern);
  auto segs = split_segments(path);
  return segments_match(pat, segs);
}

bool filter_accepts(const Filter& f, std::string_view rel_path) {
  if (rel_path.rfind("./", 0) == 0) rel_path.remove_prefix(2);
  switch (f.kind) {
    case FilterKind::Regex: {
      std::string name(file_name_of(rel_path));
      for (const std::string& a : f.args) {
        std::regex re(a);
        if (std::regex_match(name, re)) return true;
      }
      return false;
    }
    case FilterKind::Extension: {
      std::string_view ext = extension_of(file_name_of(rel_path));
      for (const std::string& a : f.args)
        if (ext == a) return true;
      return false;
    }
    case FilterKind::Pattern: {
      for (const std::string& a : f.args)
        if (ant_pattern_match(a, rel_path)) return true;
      return false;
    }
  }
  return false;
}

namespace {

constexpr uint8_t kTagExists = 0;
constexpr uint8_t kTagModTime = 1;
constexpr uint8_t kTagDigest = 2;
constexpr uint8_t kTagOutputBytes = 3;
constexpr uint8_t kTagOutputDigest = 4;
constexpr uint8_t kTagTransient = 5;

int64_t mtime_nanos(const fs::path& p) {
  std::error_code ec;
  auto t = fs::last_write_time(p, ec);
  if (ec) throw IoError("cannot stat '" + p.string() + "': " + ec.message());
  return std::chrono::duration_cast<std::chrono::nanoseconds>(t.time_since_epoch()).count();
}

Sha256 file_digest(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read '" + p.string() + "'");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256(content);
}

bool entry_passes(const fs::directory_entry& e, const std::optional<Filter>& filter) {
  if (e.is_directory()) return true;  // directories stay visible for walks
  if (!filter) return true;
  return filter_accepts(*filter, e.path().filename().string());
}

}  // namespace

void Stamp::encode_to(Bytes& out) const {
  if (auto* e = std::get_if<ExistsStamp>(&payload)) {
    put_u8(out, kTagExists);
    put_u8(out, e->exists ? 1 : 0);
  } else if (auto* m = std::get_if<ModTimeStamp>(&payload)) {
    put_u8(out, kTagModTime);
    put_u8(out, m->present ? 1 : 0);
    put_i64le(out, m->nanos);
  } else if (auto* d = std::get_if<DigestStamp>(&payload)) {
    put_u8(out, kTagDigest);
    put_u8(out, d->present ? 1 : 0);
    out.insert(out.end(), d->digest.begin(), d->digest.end());
  } else if (auto* ob = std::get_if<OutputEqualsStamp>(&payload)) {
    put_u8(out, kTagOutputBytes);
    put_bytes(out, ob->bytes);
  } else if (auto* od = std::get_if<OutputDigestStamp>(&payload)) {
    put_u8(out, kTagOutputDigest);
    out.insert(out.end(), od->digest.begin(), od->digest.end());
  } else {
    put_u8(out, kTagTransient);
  }
}

Stamp Stamp::decode(ByteReader& r) {
  uint8_t tag = 0;
  if (!r.read_u8(tag)) throw CorruptStoreError("truncated stamp");
  switch (tag) {
    case kTagExists: {
      uint8_t b = 0;
      if (!r.read_u8(b)) throw CorruptStoreError("truncated exists stamp");
      return Stamp{ExistsStamp{b == 1}};
    }
    case kTagModTime: {
      uint8_t b = 0;
      int64_t n = 0;
      if (!r.read_u8(b) || !r.read_i64le(n)) throw CorruptStoreError("truncated mtime stamp");
      return Stamp{ModTimeStamp{b == 1, n}};
    }
    case kTagDigest: {
      uint8_t b = 0;
      DigestStamp d;
      if (!r.read_u8(b) || !r.read_raw(d.digest)) throw CorruptStoreError("truncated digest stamp");
      d.present = b == 1;
      return Stamp{d};
    }
    case kTagOutputBytes: {
      OutputEqualsStamp s;
      if (!r.read_bytes(s.bytes)) throw CorruptStoreError("truncated output stamp");
      return Stamp{s};
    }
    case kTagOutputDigest: {
      OutputDigestStamp s;
      if (!r.read_raw(s.digest)) throw CorruptStoreError("truncated output digest stamp");
      return Stamp{s};
    }
    case kTagTransient:
      return Stamp{TransientStamp{}};
  }
  throw CorruptStoreError("unknown stamp tag " + std::to_string(tag));
}

std::string Stamp::describe() const {
  if (auto* e = std::get_if<ExistsStamp>(&payload)) return e->exists ? "exists" : "absent";
  if (auto* m = std::get_if<ModTimeStamp>(&payload))
    return m->present ? "mtime " + std::to_string(m->nanos) : "absent";
  if (auto* d = std::get_if<DigestStamp>(&payload))
    return d->present ? "hash " + short_hex(d->digest, 8) : "absent";
  if (auto* ob = std::get_if<OutputEqualsStamp>(&payload))
    return "output " + to_hex({ob->bytes.data(), std::min<size_t>(ob->bytes.size(), 8)});
  if (auto* od = std::get_if<OutputDigestStamp>(&payload))
    return "output-hash " + short_hex(od->digest, 8);
  return "transient";
}

Stamp stamp_path(const fs::path& fs_path, PathStamperKind kind,
                 const std::optional<Filter>& filter) {
  std::error_code ec;
  fs::file_status st = fs::status(fs_path, ec);
  bool exists = !ec && fs::exists(st);

  switch (kind) {
    case PathStamperKind::Exists:
      return Stamp{ExistsStamp{exists}};

    case PathStamperKind::Modified: {
      if (!exists) return Stamp{ModTimeStamp{false, 0}};
      if (!fs::is_directory(st)) return Stamp{ModTimeStamp{true, mtime_nanos(fs_path)}};
      // Directory: max over the directory itself and its immediate entries
      // passing the filter (subdirectories always count).
      int64_t max_ns = mtime_nanos(fs_path);
      for (const auto& e : fs::directory_iterator(fs_path, ec)) {
        if (!entry_passes(e, filter)) continue;
        max_ns = std::max(max_ns, mtime_nanos(e.path()));
      }
      if (ec) throw IoError("cannot list '" + fs_path.string() + "': " + ec.message());
      return Stamp{ModTimeStamp{true, max_ns}};
    }

    case PathStamperKind::Hash: {
      if (!exists) return Stamp{DigestStamp{false, {}}};
      if (!fs::is_directory(st)) return Stamp{DigestStamp{true, file_digest(fs_path)}};
      // Directory: digest over sorted (name, content digest) pairs of the
      // immediate files passing the filter.
      std::map<std::string, Sha256> entries;
      for (const auto& e : fs::directory_iterator(fs_path, ec)) {
        if (e.is_directory()) continue;
        if (filter && !filter_accepts(*filter, e.path().filename().string())) continue;
        entries.emplace(e.path().filename().string(), file_digest(e.path()));
      }
      if (ec) throw IoError("cannot list '" + fs_path.string() + "': " + ec.message());
      Bytes acc;
      for (const auto& [name, digest] : entries) {
        put_str(acc, name);
        acc.insert(acc.end(), digest.begin(), digest.end());
      }
      return Stamp{DigestStamp{true, sha256(acc)}};
    }
  }
  throw IoError("unreachable stamper kind");
}

Stamp stamp_output(const Value& v, OutputStamperKind kind) {
  Bytes enc = v.encode();
  if (kind == OutputStamperKind::Equals) return Stamp{OutputEqualsStamp{std::move(enc)}};
  return Stamp{OutputDigestStamp{sha256(enc)}};
}

}  // namespace pie
