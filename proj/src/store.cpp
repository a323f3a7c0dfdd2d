#include "pie/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <fstream>

#include "pie/errors.hpp"

namespace fs = std::filesystem;

namespace pie {

namespace {

constexpr char kMagic[8] = {'P', 'I', 'E', 'S', 'T', 'O', 'R', 'E'};
constexpr uint8_t kHashAlgSha256 = 1;

constexpr uint8_t kDepCall = 0;
constexpr uint8_t kDepRequire = 1;
constexpr uint8_t kDepGenerate = 2;

void encode_filter(Bytes& out, const std::optional<Filter>& f) {
  if (!f) {
    put_u8(out, 0);
    return;
  }
  put_u8(out, 1);
  put_u8(out, static_cast<uint8_t>(f->kind));
  put_u32le(out, static_cast<uint32_t>(f->args.size()));
  for (const std::string& a : f->args) put_str(out, a);
}

std::optional<Filter> decode_filter(ByteReader& r) {
  uint8_t present = 0;
  if (!r.read_u8(present)) throw CorruptStoreError("truncated filter");
  if (present == 0) return std::nullopt;
  uint8_t kind = 0;
  uint32_t n = 0;
  if (!r.read_u8(kind) || !r.read_u32le(n)) throw CorruptStoreError("truncated filter");
  if (kind > 2) throw CorruptStoreError("bad filter kind");
  std::vector<std::string> args;
  args.reserve(n);
  for (uint32_t i = 0; i < n; i++) {
    std::string a;
    if (!r.read_str(a)) throw CorruptStoreError("truncated filter arg");
    args.push_back(std::move(a));
  }
  return Filter{static_cast<FilterKind>(kind), std::move(args)};
}

}  // namespace

Bytes TaskKey::to_bytes() const {
  Bytes out;
  put_str(out, func_id);
  out.insert(out.end(), input.begin(), input.end());
  return out;
}

TaskKey TaskKey::from_bytes(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  TaskKey k;
  if (!r.read_str(k.func_id)) throw CorruptStoreError("truncated task key");
  k.input.assign(bytes.begin() + r.position(), bytes.end());
  return k;
}

std::string TaskKey::label() const {
  return func_id + "@" + short_hex(sha256(input));
}

void encode_dependency(Bytes& out, const Dependency& dep) {
  if (auto* c = std::get_if<CallDep>(&dep)) {
    put_u8(out, kDepCall);
    Bytes kb = c->callee.to_bytes();
    put_bytes(out, kb);
    put_u8(out, static_cast<uint8_t>(c->out_stamper));
    c->out_stamp.encode_to(out);
  } else if (auto* q = std::get_if<RequireDep>(&dep)) {
    put_u8(out, kDepRequire);
    put_str(out, q->path);
    put_u8(out, static_cast<uint8_t>(q->stamper));
    encode_filter(out, q->filter);
    q->stamp.encode_to(out);
  } else {
    auto& g = std::get<GenerateDep>(dep);
    put_u8(out, kDepGenerate);
    put_str(out, g.path);
    put_u8(out, static_cast<uint8_t>(g.stamper));
    g.stamp.encode_to(out);
  }
}

Dependency decode_dependency(ByteReader& r) {
  uint8_t tag = 0;
  if (!r.read_u8(tag)) throw CorruptStoreError("truncated dependency");
  switch (tag) {
    case kDepCall: {
      CallDep c;
      Bytes kb;
      uint8_t st = 0;
      if (!r.read_bytes(kb) || !r.read_u8(st)) throw CorruptStoreError("truncated call dep");
      c.callee = TaskKey::from_bytes(kb);
      c.out_stamper = static_cast<OutputStamperKind>(st);
      c.out_stamp = Stamp::decode(r);
      return c;
    }
    case kDepRequire: {
      RequireDep q;
      uint8_t st = 0;
      if (!r.read_str(q.path) || !r.read_u8(st)) throw CorruptStoreError("truncated require dep");
      q.stamper = static_cast<PathStamperKind>(st);
      q.filter = decode_filter(r);
      q.stamp = Stamp::decode(r);
      return q;
    }
    case kDepGenerate: {
      GenerateDep g;
      uint8_t st = 0;
      if (!r.read_str(g.path) || !r.read_u8(st)) throw CorruptStoreError("truncated generate dep");
      g.stamper = static_cast<PathStamperKind>(st);
      g.stamp = Stamp::decode(r);
      return g;
    }
  }
  throw CorruptStoreError("unknown dependency tag " + std::to_string(tag));
}

Bytes encode_task_data(const TaskData& d) {
  Bytes out;
  Bytes input = d.input.encode();
  put_bytes(out, input);
  put_u8(out, static_cast<uint8_t>(d.output.kind));
  if (d.output.kind == OutputRecord::Kind::Persisted) {
    if (!d.output.value) throw IoError("persisted output record without value");
    Bytes ov = d.output.value->encode();
    put_bytes(out, ov);
  }
  put_u32le(out, static_cast<uint32_t>(d.deps.size()));
  for (const Dependency& dep : d.deps) encode_dependency(out, dep);
  return out;
}

TaskData decode_task_data(std::span<const std::byte> bytes, const ForeignCodec* codec) {
  ByteReader r(bytes);
  TaskData d;
  Bytes input;
  if (!r.read_bytes(input)) throw CorruptStoreError("truncated task input");
  d.input = decode_value(input, codec);
  uint8_t kind = 0;
  if (!r.read_u8(kind) || kind > 1) throw CorruptStoreError("bad output record kind");
  d.output.kind = static_cast<OutputRecord::Kind>(kind);
  if (d.output.kind == OutputRecord::Kind::Persisted) {
    Bytes ov;
    if (!r.read_bytes(ov)) throw CorruptStoreError("truncated task output");
    d.output.value = decode_value(ov, codec);
  }
  uint32_t n = 0;
  if (!r.read_u32le(n)) throw CorruptStoreError("truncated dep count");
  d.deps.reserve(n);
  for (uint32_t i = 0; i < n; i++) d.deps.push_back(decode_dependency(r));
  if (!r.at_end()) throw CorruptStoreError("trailing bytes in task record");
  return d;
}

Store::Store(fs::path location, const ForeignCodec* codec)
    : location_(std::move(location)), codec_(codec) {}

Store::~Store() { unlock(); }

void Store::unlock() {
  if (lock_fd_ >= 0) {
    ::close(lock_fd_);  // releases the flock
    lock_fd_ = -1;
  }
}

std::unique_ptr<Store> Store::open(const fs::path& location, const ForeignCodec* codec) {
  fs::path parent = location.parent_path();
  if (!parent.empty() && !fs::exists(parent))
    throw IoError("store parent directory does not exist: " + parent.string());

  auto store = std::unique_ptr<Store>(new Store(location, codec));

  fs::path lock_path = location;
  lock_path += ".lock";
  int fd = ::open(lock_path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError("cannot open lock file " + lock_path.string());
  if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd);
    throw IoError("store is locked by another handle: " + location.string());
  }
  store->lock_fd_ = fd;

  store->load();
  return store;
}

void Store::load() {
  tasks_.clear();
  generators_.clear();
  if (!fs::exists(location_)) return;

  std::ifstream in(location_, std::ios::binary);
  if (!in) throw IoError("cannot read store file " + location_.string());
  std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::span<const std::byte> bytes(reinterpret_cast<const std::byte*>(raw.data()), raw.size());

  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw CorruptStoreError("bad magic in store file " + location_.string());
  ByteReader r(bytes.subspan(sizeof(kMagic)));
  uint32_t version = 0;
  uint8_t hash_alg = 0;
  if (!r.read_u32le(version) || !r.read_u8(hash_alg))
    throw CorruptStoreError("truncated store header");
  if (version != kVersion)
    throw CorruptStoreError("unsupported store version " + std::to_string(version));
  if (hash_alg != kHashAlgSha256)
    throw CorruptStoreError("store written with a different hash algorithm");

  uint32_t ntasks = 0;
  if (!r.read_u32le(ntasks)) throw CorruptStoreError("truncated task section");
  for (uint32_t i = 0; i < ntasks; i++) {
    Bytes key, data;
    if (!r.read_bytes(key) || !r.read_bytes(data)) throw CorruptStoreError("truncated task entry");
    tasks_[std::move(key)] = std::move(data);
  }
  uint32_t ngens = 0;
  if (!r.read_u32le(ngens)) throw CorruptStoreError("truncated generator section");
  for (uint32_t i = 0; i < ngens; i++) {
    std::string path;
    Bytes key;
    if (!r.read_str(path) || !r.read_bytes(key))
      throw CorruptStoreError("truncated generator entry");
    generators_[std::move(path)] = std::move(key);
  }
  if (!r.at_end()) throw CorruptStoreError("trailing bytes in store file");
}

std::optional<TaskData> Store::get_task(const TaskKey& k) const {
  auto it = tasks_.find(k.to_bytes());
  if (it == tasks_.end()) return std::nullopt;
  return decode_task_data(it->second, codec_);
}

void Store::set_task(const TaskKey& k, const TaskData& d) {
  Bytes kb = k.to_bytes();
  // Old generator entries of this task go first, then the new ones.
  for (auto it = generators_.begin(); it != generators_.end();) {
    if (it->second == kb)
      it = generators_.erase(it);
    else
      ++it;
  }
  tasks_[kb] = encode_task_data(d);
  for (const Dependency& dep : d.deps) {
    if (auto* g = std::get_if<GenerateDep>(&dep)) generators_[g->path] = kb;
  }
}

std::optional<TaskKey> Store::get_generator(const std::string& path) const {
  auto it = generators_.find(path);
  if (it == generators_.end()) return std::nullopt;
  return TaskKey::from_bytes(it->second);
}

void Store::drop_task(const TaskKey& k) {
  Bytes kb = k.to_bytes();
  tasks_.erase(kb);
  for (auto it = generators_.begin(); it != generators_.end();) {
    if (it->second == kb)
      it = generators_.erase(it);
    else
      ++it;
  }
}

void Store::drop_all() {
  tasks_.clear();
  generators_.clear();
}

void Store::commit() {
  Bytes out;
  out.insert(out.end(), reinterpret_cast<const std::byte*>(kMagic),
             reinterpret_cast<const std::byte*>(kMagic) + sizeof(kMagic));
  put_u32le(out, kVersion);
  put_u8(out, kHashAlgSha256);
  put_u32le(out, static_cast<uint32_t>(tasks_.size()));
  for (const auto& [key, data] : tasks_) {
    put_bytes(out, key);
    put_bytes(out, data);
  }
  put_u32le(out, static_cast<uint32_t>(generators_.size()));
  for (const auto& [path, key] : generators_) {
    put_str(out, path);
    put_bytes(out, key);
  }

  fs::path tmp = location_;
  tmp += ".tmp";
  {
    int fd = ::open(tmp.c_str(), O_CREAT | O_TRUNC | O_WRONLY | O_CLOEXEC, 0644);
    if (fd < 0) throw IoError("cannot write store temp file " + tmp.string());
    size_t off = 0;
    while (off < out.size()) {
      ssize_t n = ::write(fd, out.data() + off, out.size() - off);
      if (n < 0) {
        ::close(fd);
        throw IoError("write failed on " + tmp.string());
      }
      off += static_cast<size_t>(n);
    }
    if (::fsync(fd) != 0) {
      ::close(fd);
      throw IoError("fsync failed on " + tmp.string());
    }
    ::close(fd);
  }
  std::error_code ec;
  fs::rename(tmp, location_, ec);
  if (ec) throw IoError("cannot replace store file: " + ec.message());
}

void Store::rollback() { load(); }

void Store::for_each_task(const std::function<void(const TaskKey&, const TaskData&)>& fn) const {
  for (const auto& [kb, db] : tasks_) fn(TaskKey::from_bytes(kb), decode_task_data(db, codec_));
}

}  // namespace pie
