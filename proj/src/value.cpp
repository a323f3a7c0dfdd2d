#include "pie/value.hpp"

#include <sstream>

namespace pie {

std::string normalize_path_text(std::string_view text) {
  std::string in(text);
  for (char& c : in)
    if (c == '\\') c = '/';

  bool absolute = !in.empty() && in.front() == '/';
  // A leading "./" is a relative marker, kept verbatim; interior `.` and
  // `..` segments resolve.
  bool marker = in == "." || in.rfind("./", 0) == 0;
  std::vector<std::string> segs;
  size_t i = 0;
  while (i < in.size()) {
    size_t j = in.find('/', i);
    if (j == std::string::npos) j = in.size();
    std::string seg = in.substr(i, j - i);
    i = j + 1;
    if (seg.empty() || seg == ".") continue;
    if (seg == "..") {
      if (!segs.empty() && segs.back() != "..") {
        segs.pop_back();
      } else if (!absolute) {
        segs.push_back("..");
      }
      // ".." at the root of an absolute path is dropped.
      continue;
    }
    segs.push_back(std::move(seg));
  }

  std::string out;
  if (absolute) {
    out = "/";
    for (size_t k = 0; k < segs.size(); k++) {
      if (k) out += '/';
      out += segs[k];
    }
    return out.empty() ? "/" : out;
  }
  if (segs.empty()) return ".";
  if (marker && segs.front() != "..") out = "./";
  for (size_t k = 0; k < segs.size(); k++) {
    if (k) out += '/';
    out += segs[k];
  }
  return out;
}

bool Value::operator==(const Value& other) const {
  if (kind() != other.kind()) return false;
  switch (kind()) {
    case ValueKind::Unit:
    case ValueKind::Null:
      return true;
    case ValueKind::Bool:
      return as_bool() == other.as_bool();
    case ValueKind::Int:
      return as_int() == other.as_int();
    case ValueKind::Str:
      return as_str() == other.as_str();
    case ValueKind::Path:
      return path_text() == other.path_text();
    case ValueKind::List:
    case ValueKind::Tuple: {
      const auto& a = elems();
      const auto& b = other.elems();
      if (a.size() != b.size()) return false;
      for (size_t i = 0; i < a.size(); i++)
        if (a[i] != b[i]) return false;
      return true;
    }
    case ValueKind::Foreign:
      return foreign_obj().equals(other.foreign_obj());
  }
  return false;
}

bool Value::serializable() const {
  switch (kind()) {
    case ValueKind::List:
    case ValueKind::Tuple:
      for (const Value& v : elems())
        if (!v.serializable()) return false;
      return true;
    case ValueKind::Foreign:
      return foreign_obj().serializable();
    default:
      return true;
  }
}

void Value::encode_to(Bytes& out) const {
  put_u8(out, static_cast<uint8_t>(kind()));
  switch (kind()) {
    case ValueKind::Unit:
    case ValueKind::Null:
      break;
    case ValueKind::Bool:
      put_u8(out, as_bool() ? 1 : 0);
      break;
    case ValueKind::Int:
      put_i64le(out, as_int());
      break;
    case ValueKind::Str:
      put_str(out, as_str());
      break;
    case ValueKind::Path:
      put_str(out, path_text());
      break;
    case ValueKind::List:
    case ValueKind::Tuple: {
      const auto& es = elems();
      put_u32le(out, static_cast<uint32_t>(es.size()));
      for (const Value& v : es) v.encode_to(out);
      break;
    }
    case ValueKind::Foreign: {
      const ForeignObject& f = foreign_obj();
      if (!f.serializable()) throw NonSerializableError(std::string(f.type_name()));
      put_str(out, f.type_name());
      Bytes payload = f.canonical_bytes();
      put_bytes(out, payload);
      break;
    }
  }
}

std::string Value::display() const {
  switch (kind()) {
    case ValueKind::Unit:
      return "unit";
    case ValueKind::Null:
      return "null";
    case ValueKind::Bool:
      return as_bool() ? "true" : "false";
    case ValueKind::Int:
      return std::to_string(as_int());
    case ValueKind::Str:
      return as_str();
    case ValueKind::Path:
      return path_text();
    case ValueKind::List:
    case ValueKind::Tuple: {
      const bool list = kind() == ValueKind::List;
      std::string out(list ? "[" : "(");
      const auto& es = elems();
      for (size_t i = 0; i < es.size(); i++) {
        if (i) out += ", ";
        out += es[i].display();
      }
      out += list ? "]" : ")";
      return out;
    }
    case ValueKind::Foreign:
      return foreign_obj().display();
  }
  return "";
}

namespace {

Value decode_rec(ByteReader& r, const ForeignCodec* codec, int depth) {
  if (depth > 200) throw DecodeError("value nesting too deep");
  uint8_t tag = 0;
  if (!r.read_u8(tag)) throw DecodeError("truncated value: missing tag");
  switch (static_cast<ValueKind>(tag)) {
    case ValueKind::Unit:
      return Value::unit();
    case ValueKind::Null:
      return Value::null();
    case ValueKind::Bool: {
      uint8_t b = 0;
      if (!r.read_u8(b)) throw DecodeError("truncated bool");
      if (b > 1) throw DecodeError("invalid bool payload");
      return Value::boolean(b == 1);
    }
    case ValueKind::Int: {
      int64_t i = 0;
      if (!r.read_i64le(i)) throw DecodeError("truncated int");
      return Value::integer(i);
    }
    case ValueKind::Str: {
      std::string s;
      if (!r.read_str(s)) throw DecodeError("truncated string");
      return Value::str(std::move(s));
    }
    case ValueKind::Path: {
      std::string s;
      if (!r.read_str(s)) throw DecodeError("truncated path");
      return Value::raw_path(std::move(s));
    }
    case ValueKind::List:
    case ValueKind::Tuple: {
      uint32_t n = 0;
      if (!r.read_u32le(n)) throw DecodeError("truncated sequence");
      if (n > r.remaining()) throw DecodeError("sequence length exceeds input");
      std::vector<Value> elems;
      elems.reserve(n);
      for (uint32_t i = 0; i < n; i++) elems.push_back(decode_rec(r, codec, depth + 1));
      return static_cast<ValueKind>(tag) == ValueKind::List ? Value::list(std::move(elems))
                                                            : Value::tuple(std::move(elems));
    }
    case ValueKind::Foreign: {
      std::string name;
      Bytes payload;
      if (!r.read_str(name) || !r.read_bytes(payload)) throw DecodeError("truncated foreign");
      if (!codec) throw DecodeError("foreign value '" + name + "' but no codec available");
      auto obj = codec->decode_foreign(name, payload);
      if (!obj) throw DecodeError("no decoder for foreign type '" + name + "'");
      return Value::foreign(std::move(obj));
    }
  }
  throw DecodeError("unknown value tag " + std::to_string(tag));
}

}  // namespace

Value decode_value(std::span<const std::byte> bytes, const ForeignCodec* codec) {
  ByteReader r(bytes);
  Value v = decode_rec(r, codec, 0);
  if (!r.at_end()) throw DecodeError("trailing bytes after value");
  return v;
}

const char* kind_name(ValueKind k) {
  switch (k) {
    case ValueKind::Unit:
      return "unit";
    case ValueKind::Bool:
      return "bool";
    case ValueKind::Int:
      return "int";
    case ValueKind::Str:
      return "string";
    case ValueKind::Path:
      return "path";
    case ValueKind::Null:
      return "null";
    case ValueKind::List:
      return "list";
    case ValueKind::Tuple:
      return "tuple";
    case ValueKind::Foreign:
      return "foreign";
  }
  return "?";
}

}  // namespace pie
