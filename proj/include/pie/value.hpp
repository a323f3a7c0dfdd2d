#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pie/bytes.hpp"
#include "pie/errors.hpp"

namespace pie {

class Value;

// Host-side object behind a Foreign value. Implementations supply identity,
// display text and (when serializable) a canonical byte form.
class ForeignObject {
 public:
  virtual ~ForeignObject() = default;

  virtual std::string_view type_name() const = 0;
  virtual bool equals(const ForeignObject& other) const = 0;
  virtual std::string display() const = 0;
  virtual bool serializable() const { return true; }
  // Canonical payload bytes; only called when serializable() is true.
  virtual Bytes canonical_bytes() const = 0;
  virtual uint64_t digest64() const = 0;
};

// Reconstructs foreign objects from their canonical payload when decoding
// persisted values. Implemented by the foreign registry.
class ForeignCodec {
 public:
  virtual ~ForeignCodec() = default;
  virtual std::shared_ptr<const ForeignObject> decode_foreign(
      std::string_view type_name, std::span<const std::byte> payload) const = 0;
};

enum class ValueKind : uint8_t {
  Unit = 0,
  Bool = 1,
  Int = 2,
  Str = 3,
  Path = 4,
  Null = 5,
  List = 6,
  Tuple = 7,
  Foreign = 8,
};

// Normalizes pie path text: resolves `.`/`..` segments, collapses separators,
// drops trailing separators. Relative paths keep a leading "./" marker
// (or lead with ".." segments); the root is "/".
std::string normalize_path_text(std::string_view text);

// Immutable runtime value. Copies are cheap; sequences are shared.
class Value {
 public:
  Value() : v_(UnitV{}) {}

  static Value unit() { return Value(UnitV{}); }
  static Value boolean(bool b) { return Value(b); }
  static Value integer(int64_t i) { return Value(i); }
  static Value str(std::string s) { return Value(StrV{std::move(s)}); }
  static Value path(std::string_view unnormalized) {
    return Value(PathV{normalize_path_text(unnormalized)});
  }
  // For already-normalized text (decoding, internal plumbing).
  static Value raw_path(std::string normalized) { return Value(PathV{std::move(normalized)}); }
  static Value null() { return Value(NullV{}); }
  static Value list(std::vector<Value> elems) {
    return Value(ListV{std::make_shared<const std::vector<Value>>(std::move(elems))});
  }
  static Value tuple(std::vector<Value> elems) {
    return Value(TupleV{std::make_shared<const std::vector<Value>>(std::move(elems))});
  }
  static Value foreign(std::shared_ptr<const ForeignObject> obj) {
    return Value(ForeignV{std::move(obj)});
  }

  ValueKind kind() const { return static_cast<ValueKind>(v_.index()); }

  bool is_unit() const { return kind() == ValueKind::Unit; }
  bool is_null() const { return kind() == ValueKind::Null; }

  bool as_bool() const { return std::get<bool>(v_); }
  int64_t as_int() const { return std::get<int64_t>(v_); }
  const std::string& as_str() const { return std::get<StrV>(v_).text; }
  const std::string& path_text() const { return std::get<PathV>(v_).text; }
  const std::vector<Value>& elems() const {
    if (kind() == ValueKind::List) return *std::get<ListV>(v_).elems;
    return *std::get<TupleV>(v_).elems;
  }
  const ForeignObject& foreign_obj() const { return *std::get<ForeignV>(v_).obj; }
  std::shared_ptr<const ForeignObject> foreign_ptr() const { return std::get<ForeignV>(v_).obj; }

  bool operator==(const Value& other) const;
  bool operator!=(const Value& other) const { return !(*this == other); }

  // True when the value contains no non-serializable foreign object.
  bool serializable() const;

  // Canonical encoding; throws NonSerializableError.
  void encode_to(Bytes& out) const;
  Bytes encode() const {
    Bytes out;
    encode_to(out);
    return out;
  }

  std::string display() const;

 private:
  struct UnitV {};
  struct StrV {
    std::string text;
  };
  struct PathV {
    std::string text;
  };
  struct NullV {};
  struct ListV {
    std::shared_ptr<const std::vector<Value>> elems;
  };
  struct TupleV {
    std::shared_ptr<const std::vector<Value>> elems;
  };
  struct ForeignV {
    std::shared_ptr<const ForeignObject> obj;
  };

  using Repr =
      std::variant<UnitV, bool, int64_t, StrV, PathV, NullV, ListV, TupleV, ForeignV>;

  explicit Value(Repr v) : v_(std::move(v)) {}

  Repr v_;
};

// Inverse of Value::encode. Consumes the whole span; throws DecodeError on
// malformed input, and when a foreign tag is hit without a codec (or the
// codec does not know the type).
Value decode_value(std::span<const std::byte> bytes, const ForeignCodec* codec = nullptr);

const char* kind_name(ValueKind k);

}  // namespace pie
