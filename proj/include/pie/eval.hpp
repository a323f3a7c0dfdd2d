#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>

#include "pie/check.hpp"
#include "pie/runtime.hpp"

namespace pie {

struct ForeignResult {
  Value value;
  bool transient = false;
};

// Host functions receive the execution context so they can record their own
// path dependencies (a foreign function that reads files without recording a
// require is outside the soundness guarantee).
using HostFunc = std::function<ForeignResult(ExecContext&, std::span<const Value>)>;
using HostMethod = std::function<Value(const Value& recv, std::span<const Value>)>;

// Task: calls are recorded, cached and validated like DSL tasks.
// Inline: evaluated directly inside the calling task, every time it runs;
// for process execution and other effects that must not be cached by
// argument value alone.
enum class CallMode : uint8_t { Task, Inline };

class ForeignRegistry : public ForeignCodec {
 public:
  struct FuncEntry {
    size_t arity = 0;
    HostFunc fn;
    CallMode mode = CallMode::Task;
  };
  struct DataDescriptor {
    std::function<std::shared_ptr<const ForeignObject>(std::span<const std::byte>)> decode;
    std::map<std::string, HostMethod> methods;
  };

  void register_func(std::string name, size_t arity, HostFunc fn,
                     CallMode mode = CallMode::Task) {
    funcs_[std::move(name)] = FuncEntry{arity, std::move(fn), mode};
  }
  void register_data(std::string name, DataDescriptor desc) {
    data_[std::move(name)] = std::move(desc);
  }

  const FuncEntry* find_func(const std::string& name) const {
    auto it = funcs_.find(name);
    return it == funcs_.end() ? nullptr : &it->second;
  }
  const DataDescriptor* find_data(const std::string& name) const {
    auto it = data_.find(name);
    return it == data_.end() ? nullptr : &it->second;
  }

  std::shared_ptr<const ForeignObject> decode_foreign(
      std::string_view type_name, std::span<const std::byte> payload) const override;

 private:
  std::map<std::string, FuncEntry> funcs_;
  std::map<std::string, DataDescriptor> data_;
};

// General-purpose foreign object: a type name plus an opaque payload string.
// Equality, digest and serialization all derive from the payload.
class BytesForeign : public ForeignObject {
 public:
  BytesForeign(std::string type_name, std::string payload, bool serializable = true,
               std::string display = {})
      : type_name_(std::move(type_name)),
        payload_(std::move(payload)),
        serializable_(serializable),
        display_(std::move(display)) {}

  std::string_view type_name() const override { return type_name_; }
  bool equals(const ForeignObject& other) const override {
    auto* o = dynamic_cast<const BytesForeign*>(&other);
    return o && o->type_name_ == type_name_ && o->payload_ == payload_;
  }
  std::string display() const override {
    if (!display_.empty()) return display_;
    // Derived from the payload only, so a store round-trip displays the same.
    bool printable = payload_.size() <= 64;
    for (char c : payload_)
      if (c < 0x20 || c > 0x7e) printable = false;
    if (printable && !payload_.empty()) return type_name_ + "(" + payload_ + ")";
    return "<" + type_name_ + ">";
  }
  bool serializable() const override { return serializable_; }
  Bytes canonical_bytes() const override {
    if (!serializable_) throw NonSerializableError(type_name_);
    Bytes b;
    b.reserve(payload_.size());
    for (char c : payload_) b.push_back(std::byte(uint8_t(c)));
    return b;
  }
  uint64_t digest64() const override { return fnv1a64(payload_); }

  const std::string& payload() const { return payload_; }

 private:
  std::string type_name_;
  std::string payload_;
  bool serializable_;
  std::string display_;
};

// Codec that falls back to payload-preserving opaque objects for foreign
// types without a registered decoder. Store inspection (graph export, watch
// re-stamping) uses it so records stay readable without the full program.
class OpaqueCodec : public ForeignCodec {
 public:
  explicit OpaqueCodec(const ForeignCodec* inner = nullptr) : inner_(inner) {}
  std::shared_ptr<const ForeignObject> decode_foreign(
      std::string_view type_name, std::span<const std::byte> payload) const override {
    if (inner_) {
      if (auto obj = inner_->decode_foreign(type_name, payload)) return obj;
    }
    std::string s(reinterpret_cast<const char*>(payload.data()), payload.size());
    return std::make_shared<BytesForeign>(std::string(type_name), std::move(s));
  }

 private:
  const ForeignCodec* inner_;
};

// Installs every function definition of the checked program as a task:
// DSL bodies as interpreted tasks, foreign definitions as host calls.
// Inline-mode foreign functions are dispatched inside callers instead.
// `tp` is shared with the installed closures; `fr` must outlive `reg`.
void register_program(std::shared_ptr<const TypedProgram> tp, const ForeignRegistry& fr,
                      TaskRegistry& reg);

// Multiple arguments pack into a tuple, a single argument stays itself,
// zero arguments become unit.
Value pack_args(std::vector<Value> args);

// Runtime conformance of a value against a declared type.
bool value_conforms(const Value& v, const Type& t, const TypedProgram& tp);

// Builds the task key for an entry call and requires it.
Value call_entry(Session& s, const TypedProgram& tp, const std::string& func,
                 std::vector<Value> args);

// Registers the built-in foreign stdlib (currently `exec`).
void register_stdlib(ForeignRegistry& fr);

// `replaceExtension` and friends; throws UnknownMethodError.
Value path_method(const Value& recv, const std::string& name, std::span<const Value> args);

}  // namespace pie
