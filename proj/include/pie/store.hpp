#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pie/bytes.hpp"
#include "pie/stamp.hpp"
#include "pie/value.hpp"

namespace pie {

// Identity of one function call: function id plus canonically encoded input.
struct TaskKey {
  std::string func_id;
  Bytes input;

  bool operator==(const TaskKey&) const = default;

  // func_id length-prefixed, then the input bytes.
  Bytes to_bytes() const;
  static TaskKey from_bytes(std::span<const std::byte> bytes);

  std::string label() const;  // func_id@inputdigest, for graphs and errors
};

struct TaskKeyHash {
  size_t operator()(const TaskKey& k) const {
    Bytes b = k.to_bytes();
    return static_cast<size_t>(fnv1a64(b));
  }
};

struct CallDep {
  TaskKey callee;
  OutputStamperKind out_stamper = OutputStamperKind::Equals;
  Stamp out_stamp;
  bool operator==(const CallDep&) const = default;
};

struct RequireDep {
  std::string path;  // normalized pie path text
  PathStamperKind stamper = PathStamperKind::Modified;
  std::optional<Filter> filter;
  Stamp stamp;
  bool operator==(const RequireDep&) const = default;
};

struct GenerateDep {
  std::string path;
  PathStamperKind stamper = PathStamperKind::Hash;
  Stamp stamp;
  bool operator==(const GenerateDep&) const = default;
};

using Dependency = std::variant<CallDep, RequireDep, GenerateDep>;

struct OutputRecord {
  enum class Kind : uint8_t { Persisted = 0, Transient = 1 };
  Kind kind = Kind::Persisted;
  std::optional<Value> value;  // present iff Persisted
};

// Persisted record of one executed call.
struct TaskData {
  Value input;
  OutputRecord output;
  std::vector<Dependency> deps;  // execution order
};

// Durable single-file key-value store for task records and the generated
// path -> generator index. All mutations stay in memory until commit();
// commit atomically replaces the store file (write temp + rename). A lock
// file serializes access: one handle per store at a time.
class Store {
 public:
  static constexpr uint32_t kVersion = 1;

  // Creates an empty store when the file is absent. Throws CorruptStoreError
  // on bad magic/version/truncation, IoError on filesystem trouble (including
  // an already-locked store).
  static std::unique_ptr<Store> open(const std::filesystem::path& location,
                                     const ForeignCodec* codec = nullptr);

  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  std::optional<TaskData> get_task(const TaskKey& k) const;
  void set_task(const TaskKey& k, const TaskData& d);
  std::optional<TaskKey> get_generator(const std::string& path) const;
  void drop_task(const TaskKey& k);
  void drop_all();

  // Makes all writes since the previous commit durable as one atomic group.
  void commit();

  // Discards uncommitted writes, restoring the last committed state.
  void rollback();

  size_t task_count() const { return tasks_.size(); }
  void for_each_task(const std::function<void(const TaskKey&, const TaskData&)>& fn) const;

  const ForeignCodec* codec() const { return codec_; }
  const std::filesystem::path& location() const { return location_; }

 private:
  Store(std::filesystem::path location, const ForeignCodec* codec);
  void load();
  void unlock();

  std::filesystem::path location_;
  const ForeignCodec* codec_;
  int lock_fd_ = -1;

  // Ordered maps keep the file layout canonical.
  std::map<Bytes, Bytes> tasks_;              // key bytes -> encoded TaskData
  std::map<std::string, Bytes> generators_;   // path text -> key bytes
};

Bytes encode_task_data(const TaskData& d);
TaskData decode_task_data(std::span<const std::byte> bytes, const ForeignCodec* codec);

void encode_dependency(Bytes& out, const Dependency& dep);
Dependency decode_dependency(ByteReader& r);

}  // namespace pie
